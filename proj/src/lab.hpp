#pragma once

// Experiment recipes, configuration and plot-data emission.
//
// Configuration is a JSON object or key-value text with [table] headers.
// Keys may be addressed with dotted paths ("evolution.tau"). Every recipe needs "recipe" and "grid"; all other
// keys have defaults and every seed is explicit, so a results directory is a
// pure function of its configuration.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dtn.hpp"
#include "evolution.hpp"
#include "grid.hpp"

namespace lsgrad::lab {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class Config {
 public:
  Config() = default;
  explicit Config(nlohmann::json root);
  static Config from_file(const std::filesystem::path& path);
  static Config from_text(const std::string& text);

  bool has(const std::string& key) const;
  const nlohmann::json& at(const std::string& key) const;  // throws ConfigError naming the key

  std::string string(const std::string& key) const;
  std::string string(const std::string& key, const std::string& fallback) const;
  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  std::int64_t integer(const std::string& key, std::int64_t fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) const;

  void set(const std::string& key, nlohmann::json value);
  const nlohmann::json& json() const { return root_; }

 private:
  const nlohmann::json* find(const std::string& key) const;
  nlohmann::json root_ = nlohmann::json::object();
};

// Boundary data presets:
//   sign_x            sign of the x coordinate of each boundary midpoint
//   example33         cos 2t + 1 where cos 2t > 0, cos 2t - 1 where cos 2t < 0
//   const:C           constant C
//   linear_x:C        C times the x coordinate
//   random:SEED[:A]   uniform in [-A, A] (A = 1), reproducible across platforms
BoundaryData boundary_preset(const Grid& grid, const std::string& spec);

// Uniform double in [0, 1) from a 64-bit Mersenne twister, platform independent.
std::vector<double> uniform_samples(std::uint64_t seed, std::size_t count);

// Paper family for the disk counter example: 2x^2 on the side caps,
// -2y^2 on the top and bottom caps, lambda in the central square.
double example33_family(double lambda, double x, double y);

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string name;   // file stem
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  std::vector<Series> series;
};

// Writes <name>.csv (series,x,y rows) and <name>.plot.json; with `svg` also
// a line plot <name>.svg.
void emit_plot_data(const std::filesystem::path& dir, const PlotSpec& plot, bool svg);
std::string render_svg(const PlotSpec& plot);

const std::vector<std::string>& recipe_names();

struct ExperimentResult {
  std::string recipe;
  std::filesystem::path directory;
  nlohmann::json summary;
  bool converged = true;
};

ExperimentResult run_experiment(const Config& config, const std::filesystem::path& out_dir);

// FNV-1a digest over the relative paths and contents of every file below dir.
std::uint64_t directory_digest(const std::filesystem::path& dir);

// Persistence shared by the recipes, the C interface and the CLI.
nlohmann::json to_json(const CertificateReport& c);
nlohmann::json to_json(const SolverOptions& o);
nlohmann::json to_json(const DiagnosticsReport& d);

SolverOptions solver_options(const Config& config);

// u.csv, z.csv (interior faces then boundary faces), g.csv, report.json.
void save_solution(const std::filesystem::path& dir, const TvSolution& sol,
                   const CertificateReport& cert, const nlohmann::json& extra = {});

// One CSV per diagnostic, report.json and, when requested, states/NNNNN.csv.
void save_trajectory(const std::filesystem::path& dir, const Grid& grid, const Trajectory& traj,
                     const BoundaryData& h0, bool states);

}  // namespace lsgrad::lab
