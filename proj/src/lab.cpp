#include "lab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "io.hpp"
#include "oracle.hpp"
#include "plap.hpp"
#include "resolvent.hpp"
#include "tvmin.hpp"

namespace lsgrad::lab {

namespace fs = std::filesystem;
using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Config

Config::Config(Json root) : root_(std::move(root)) {
  if (!root_.is_object()) throw ConfigError("configuration must be a JSON object");
}

Config Config::from_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw io::IoError("cannot open configuration " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Strips a trailing # comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

// Key-value text: "key = value" lines, "[table]" headers, # comments.
// Values are JSON scalars or arrays; bare words are taken as strings.
Json parse_key_value(const std::string& text) {
  Json root = Json::object();
  std::string table;
  std::stringstream ss(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(ss, raw)) {
    ++lineno;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("malformed configuration: " + where);
      table = trim(line.substr(1, line.size() - 2));
      if (table.empty() || table.find_first_not_of(
                               "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_.-") !=
                               std::string::npos) {
        throw ConfigError("malformed configuration: bad table name at " + where);
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("malformed configuration: expected key = value at " + where);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string text_value = trim(line.substr(eq + 1));
    if (key.empty() || text_value.empty()) {
      throw ConfigError("malformed configuration: " + where);
    }
    Json value;
    try {
      value = Json::parse(text_value);
    } catch (const Json::parse_error&) {
      if (text_value.find_first_of("\"[]{},") != std::string::npos) {
        throw ConfigError("malformed configuration: bad value at " + where);
      }
      value = text_value;
    }
    Json* node = &root;
    std::string path = table.empty() ? key : table + "." + key;
    std::size_t start = 0;
    while (true) {
      const auto dot = path.find('.', start);
      const std::string part = path.substr(start, dot == std::string::npos ? dot : dot - start);
      if (dot == std::string::npos) {
        (*node)[part] = std::move(value);
        break;
      }
      node = &(*node)[part];
      if (!node->is_object()) {
        if (!node->is_null()) throw ConfigError("malformed configuration: key clash at " + where);
        *node = Json::object();
      }
      start = dot + 1;
    }
  }
  return root;
}

}  // namespace

Config Config::from_text(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    try {
      return Config(Json::parse(text));
    } catch (const Json::parse_error& e) {
      throw ConfigError(std::string("malformed configuration: ") + e.what());
    }
  }
  return Config(parse_key_value(text));
}

const Json* Config::find(const std::string& key) const {
  const Json* node = &root_;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
    if (!node->is_object()) return nullptr;
    const auto it = node->find(part);
    if (it == node->end()) return nullptr;
    node = &*it;
    if (dot == std::string::npos) return node;
    start = dot + 1;
  }
}

bool Config::has(const std::string& key) const { return find(key) != nullptr; }

const Json& Config::at(const std::string& key) const {
  const Json* node = find(key);
  if (node == nullptr) throw ConfigError("missing required key '" + key + "'");
  return *node;
}

std::string Config::string(const std::string& key) const {
  const Json& v = at(key);
  if (!v.is_string()) throw ConfigError("key '" + key + "' must be a string");
  return v.get<std::string>();
}

std::string Config::string(const std::string& key, const std::string& fallback) const {
  return has(key) ? string(key) : fallback;
}

double Config::number(const std::string& key) const {
  const Json& v = at(key);
  if (!v.is_number()) throw ConfigError("key '" + key + "' must be a number");
  return v.get<double>();
}

double Config::number(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

std::int64_t Config::integer(const std::string& key, std::int64_t fallback) const {
  if (!has(key)) return fallback;
  const Json& v = at(key);
  if (!v.is_number_integer()) throw ConfigError("key '" + key + "' must be an integer");
  return v.get<std::int64_t>();
}

bool Config::flag(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const Json& v = at(key);
  if (!v.is_boolean()) throw ConfigError("key '" + key + "' must be true or false");
  return v.get<bool>();
}

std::vector<double> Config::numbers(const std::string& key,
                                    const std::vector<double>& fallback) const {
  if (!has(key)) return fallback;
  const Json& v = at(key);
  if (!v.is_array()) throw ConfigError("key '" + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError("key '" + key + "' must be an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

void Config::set(const std::string& key, Json value) {
  Json* node = &root_;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
    if (dot == std::string::npos) {
      (*node)[part] = std::move(value);
      return;
    }
    node = &(*node)[part];
    if (!node->is_object()) *node = Json::object();
    start = dot + 1;
  }
}

// ---------------------------------------------------------------------------
// Presets

std::vector<double> uniform_samples(std::uint64_t seed, std::size_t count) {
  std::mt19937_64 rng(seed);
  std::vector<double> out(count);
  for (double& v : out) v = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return out;
}

double example33_family(double lambda, double x, double y) {
  const double c = std::sqrt(0.5);
  if (std::abs(x) > c && std::abs(y) < c) return 2.0 * x * x;
  if (std::abs(y) > c && std::abs(x) < c) return -2.0 * y * y;
  return lambda;
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  return parts;
}

double parse_number(const std::string& s, const std::string& context) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("cannot parse number '" + s + "' in '" + context + "'");
  }
}

}  // namespace

BoundaryData boundary_preset(const Grid& grid, const std::string& spec) {
  const auto parts = split(spec, ':');
  if (parts.empty()) throw std::invalid_argument("empty boundary preset");
  const std::string& name = parts[0];
  auto arg = [&](std::size_t i, double fallback) {
    return parts.size() > i ? parse_number(parts[i], spec) : fallback;
  };
  if (name == "sign_x") {
    return sample_boundary(grid, [](Vec2 p) { return p.x > 0 ? 1.0 : (p.x < 0 ? -1.0 : 0.0); });
  }
  if (name == "example33") {
    return sample_boundary(grid, [](Vec2 p) {
      const double r2 = p.x * p.x + p.y * p.y;
      if (r2 == 0.0) return 0.0;
      const double c = (p.x * p.x - p.y * p.y) / r2;
      return c > 0 ? c + 1.0 : (c < 0 ? c - 1.0 : 0.0);
    });
  }
  if (name == "const") {
    const double c = arg(1, 0.0);
    return make_boundary(grid, c);
  }
  if (name == "linear_x") {
    const double c = arg(1, 1.0);
    return sample_boundary(grid, [c](Vec2 p) { return c * p.x; });
  }
  if (name == "random") {
    if (parts.size() < 2) throw std::invalid_argument("random preset needs a seed");
    const auto seed = static_cast<std::uint64_t>(arg(1, 0.0));
    const double amp = arg(2, 1.0);
    const auto u = uniform_samples(seed, grid.num_boundary());
    BoundaryData b = make_boundary(grid);
    for (std::size_t k = 0; k < u.size(); ++k) b.values[k] = amp * (2.0 * u[k] - 1.0);
    return b;
  }
  throw std::invalid_argument("unknown boundary preset '" + spec + "'");
}

// ---------------------------------------------------------------------------
// Plot data

void emit_plot_data(const fs::path& dir, const PlotSpec& plot, bool svg) {
  fs::create_directories(dir);
  {
    std::ofstream out(dir / (plot.name + ".csv"));
    if (!out) throw io::IoError("cannot write plot data in " + dir.string());
    out << "series,x,y\n";
    for (const auto& s : plot.series) {
      if (s.x.size() != s.y.size()) throw std::invalid_argument("series length mismatch");
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        out << s.name << ',' << io::format_double(s.x[i]) << ',' << io::format_double(s.y[i])
            << '\n';
      }
    }
  }
  Json meta;
  meta["title"] = plot.title;
  meta["x_label"] = plot.x_label;
  meta["y_label"] = plot.y_label;
  meta["log_y"] = plot.log_y;
  meta["data"] = plot.name + ".csv";
  Json series = Json::array();
  for (const auto& s : plot.series) series.push_back({{"name", s.name}, {"points", s.x.size()}});
  meta["series"] = std::move(series);
  io::write_json(dir / (plot.name + ".plot.json"), meta);
  if (svg) {
    std::ofstream out(dir / (plot.name + ".svg"));
    out << render_svg(plot);
  }
}

std::string render_svg(const PlotSpec& plot) {
  const double W = 640, H = 400, L = 70, R = 20, T = 40, B = 50;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  auto ty = [&](double y) { return plot.log_y ? std::log10(y) : y; };
  for (const auto& s : plot.series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double y = ty(s.y[i]);
      if (!std::isfinite(s.x[i]) || !std::isfinite(y)) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (!(x1 > x0)) {
    x0 = std::isfinite(x0) ? x0 - 1 : 0;
    x1 = x0 + 2;
  }
  if (!(y1 > y0)) {
    y0 = std::isfinite(y0) ? y0 - 1 : 0;
    y1 = y0 + 2;
  }
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

  std::ostringstream os;
  char buf[160];
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" "
        "font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf, "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" "
                "fill=\"none\" stroke=\"black\"/>\n", L, T, W - L - R, H - T - B);
  os << buf;
  os << "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << plot.title
     << "</text>\n";
  os << "<text x=\"" << (L + (W - L - R) / 2) << "\" y=\"" << (H - 12)
     << "\" text-anchor=\"middle\">" << plot.x_label << "</text>\n";
  os << "<text x=\"16\" y=\"" << (T + (H - T - B) / 2) << "\" text-anchor=\"middle\" "
     << "transform=\"rotate(-90 16 " << (T + (H - T - B) / 2) << ")\">"
     << (plot.log_y ? "log10 " : "") << plot.y_label << "</text>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4.0, fy = y0 + (y1 - y0) * i / 4.0;
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">%.3g</text>\n",
                  px(fx), H - B + 16, fx);
    os << buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\">%.3g</text>\n",
                  L - 6, py(fy) + 4, fy);
    os << buf;
  }
  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const auto& s = plot.series[k];
    const char* color = colors[k % 6];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double y = ty(s.y[i]);
      if (!std::isfinite(y)) continue;
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(s.x[i]), py(y));
      os << buf;
    }
    os << "\"/>\n";
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" fill=\"%s\">%s</text>\n",
                  W - R - 150, T + 16.0 + 14.0 * static_cast<double>(k), color, s.name.c_str());
    os << buf;
  }
  os << "</svg>\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Persistence

Json to_json(const CertificateReport& c) {
  return {{"z_sup", c.z_sup},
          {"g_sup", c.g_sup},
          {"div_residual", c.div_residual},
          {"div_max", c.div_max},
          {"pairing_defect", c.pairing_defect},
          {"sign_defect", c.sign_defect},
          {"sign_defect_max", c.sign_defect_max},
          {"flux", c.flux}};
}

Json to_json(const SolverOptions& o) {
  return {{"max_iters", o.max_iters},       {"tolerance", o.tolerance},
          {"div_tolerance", o.div_tolerance}, {"abs_tolerance", o.abs_tolerance},
          {"step_primal", o.step_primal},   {"step_dual", o.step_dual},
          {"seed", o.seed},                 {"check_every", o.check_every},
          {"adaptive_steps", o.adaptive_steps}};
}

Json to_json(const DiagnosticsReport& d) {
  return {{"decay_checks_apply", d.decay_checks_apply},
          {"phi_scale", d.phi_scale},
          {"mass_drift", d.mass_drift},
          {"phi_increase", d.phi_increase},
          {"decay_ratio", d.decay_ratio},
          {"ab_ratio", d.ab_ratio},
          {"ab_pointwise_ratio", d.ab_pointwise_ratio},
          {"energy_excess", d.energy_excess},
          {"energy_scale", d.energy_scale},
          {"spread_initial", d.spread_initial},
          {"spread_final", d.spread_final},
          {"stabilization_time", d.stabilization_time}};
}

SolverOptions solver_options(const Config& config) {
  SolverOptions o;
  o.tolerance = config.number("tolerance", o.tolerance);
  o.div_tolerance = config.number("div_tolerance", o.tolerance);
  o.abs_tolerance = config.number("abs_tolerance", o.abs_tolerance);
  o.max_iters = static_cast<int>(config.integer("max_iters", o.max_iters));
  o.seed = static_cast<std::uint64_t>(config.integer("solver_seed", 0));
  o.check_every = static_cast<int>(config.integer("check_every", o.check_every));
  o.adaptive_steps = config.flag("adaptive_steps", o.adaptive_steps);
  validate(o);
  return o;
}

void save_solution(const fs::path& dir, const TvSolution& sol, const CertificateReport& cert,
                   const Json& extra) {
  fs::create_directories(dir);
  io::write_csv(dir / "u.csv", sol.u.values);
  std::vector<double> z = sol.z.interior;
  z.insert(z.end(), sol.z.boundary.begin(), sol.z.boundary.end());
  io::write_csv(dir / "z.csv", z);
  io::write_csv(dir / "g.csv", sol.z.boundary);
  Json rep = extra.is_object() ? extra : Json::object();
  rep["primal_energy"] = sol.primal_energy;
  rep["dual_energy"] = sol.dual_energy;
  rep["gap"] = sol.gap;
  rep["iterations"] = sol.iterations;
  rep["div_residual"] = sol.div_residual;
  rep["div_max"] = sol.div_max;
  rep["converged"] = sol.converged;
  rep["interior_faces"] = sol.z.interior.size();
  rep["boundary_faces"] = sol.z.boundary.size();
  rep["certificate"] = to_json(cert);
  io::write_json(dir / "report.json", rep);
}

void save_trajectory(const fs::path& dir, const Grid& grid, const Trajectory& traj,
                     const BoundaryData& h0, bool states) {
  fs::create_directories(dir);
  const std::size_t n = traj.states.size();
  std::vector<double> mass, phi, l1, l2, linf, gap, div, sign, iters, conv;
  for (const auto& d : traj.diagnostics) {
    mass.push_back(d.mass);
    phi.push_back(d.phi);
    l1.push_back(d.dhdt_norms[0]);
    l2.push_back(d.dhdt_norms[1]);
    linf.push_back(d.dhdt_norms[2]);
    gap.push_back(d.gap);
    div.push_back(d.div_residual);
    sign.push_back(d.sign_defect);
    iters.push_back(d.iterations);
    conv.push_back(d.converged ? 1.0 : 0.0);
  }
  const DiagnosticsReport rep = diagnostics_report(traj, h0, grid);
  io::write_table(dir / "mass.csv", {"t", "mass"}, {traj.times, mass});
  io::write_table(dir / "phi.csv", {"t", "phi"}, {traj.times, phi});
  io::write_table(dir / "dhdt.csv", {"t", "l1", "l2", "linf"}, {traj.times, l1, l2, linf});
  io::write_table(dir / "spread.csv", {"t", "spread_l1", "entropy_ratio"},
                  {traj.times, rep.spread, rep.entropy_ratio});
  io::write_table(dir / "energy.csv", {"t", "lhs", "rhs"},
                  {traj.times, rep.energy_lhs, rep.energy_rhs});
  io::write_table(dir / "solver.csv",
                  {"t", "gap", "div_residual", "sign_defect", "iterations", "converged"},
                  {traj.times, gap, div, sign, iters, conv});
  Json j = to_json(rep);
  j["tau"] = traj.tau;
  j["f"] = traj.f.describe();
  j["steps"] = n - 1;
  j["converged"] = traj.converged;
  io::write_json(dir / "report.json", j);
  if (states) {
    char name[32];
    for (std::size_t i = 0; i < n; ++i) {
      std::snprintf(name, sizeof name, "%05zu.csv", i);
      io::write_csv(dir / "states" / name, traj.states[i].values);
      if (i > 0) io::write_csv(dir / "step_g" / name, traj.step_g[i - 1].values);
    }
  }
}

// ---------------------------------------------------------------------------
// Recipes

namespace {

struct Context {
  const Config& config;
  fs::path dir;
  bool svg = false;
  Json summary = Json::object();
  bool converged = true;
};

Grid config_grid(const Config& c) { return io::resolve_grid(c.string("grid")); }

Grid same_family(const Grid& g, int n) {
  if (g.kind() == GridKind::kDisk) return build_disk_grid(n, g.size());
  if (g.kind() == GridKind::kSquare) return build_square_grid(n, g.size());
  throw std::invalid_argument("refinement needs a square or disk grid");
}

BoundaryData preset_or_file(const Grid& grid, const std::string& spec) {
  if (fs::exists(spec)) {
    BoundaryData b{io::read_field(spec)};
    check_shape(grid, b);
    return b;
  }
  return boundary_preset(grid, spec);
}

NemytskiiSpec parse_nonlinearity(const Config& c, const std::string& key,
                                 const std::string& fallback) {
  const std::string spec = c.string(key, fallback);
  if (spec == "zero") return NemytskiiSpec::zero();
  if (spec.rfind("linear:", 0) == 0) return NemytskiiSpec::linear(parse_number(spec.substr(7), spec));
  throw ConfigError("key '" + key + "': unknown nonlinearity '" + spec + "'");
}

void disk_nonuniqueness(Context& ctx) {
  const Grid grid = config_grid(ctx.config);
  const SolverOptions opts = solver_options(ctx.config);
  const auto lambdas = ctx.config.numbers("lambdas", {-1.0, -0.5, 0.0, 0.5, 1.0});
  const BoundaryData h = boundary_preset(grid, "example33");

  std::vector<double> energies;
  for (double lam : lambdas) {
    const BulkField u = sample_bulk(grid, [lam](Vec2 p) { return example33_family(lam, p.x, p.y); });
    energies.push_back(energy_phi_h(grid, h, u));
  }
  const auto [mn, mx] = std::minmax_element(energies.begin(), energies.end());
  const TvSolution sol = solve_relaxed_dirichlet(grid, h, opts);
  ctx.converged = sol.converged;

  io::write_table(ctx.dir / "family.csv", {"lambda", "phi"}, {lambdas, energies});
  save_solution(ctx.dir / "solver", sol, certify(grid, h, sol));
  emit_plot_data(ctx.dir, {"family_energy", "Relaxed energy of the family u^lambda", "lambda",
                           "Phi_h(u^lambda)", false, {{"family", lambdas, energies}}},
                 ctx.svg);
  ctx.summary["family_energy"] = energies;
  ctx.summary["family_min"] = *mn;
  ctx.summary["family_spread"] = (*mx - *mn) / *mn;
  ctx.summary["solver_energy"] = sol.primal_energy;
  ctx.summary["solver_gap"] = sol.gap;
  ctx.summary["closed_form"] = 20.0 * std::sqrt(2.0) / 3.0;
}

void sign_data(Context& ctx) {
  const Grid grid = config_grid(ctx.config);
  const SolverOptions opts = solver_options(ctx.config);
  const auto res = ctx.config.numbers("oracle_resolutions", {32.0, 64.0});
  const BoundaryData h = boundary_preset(grid, "sign_x");
  const DtNRecord rec = evaluate(grid, h, opts);
  ctx.converged = rec.converged;

  std::vector<double> ns, values;
  for (double r : res) {
    const Grid g = same_family(grid, static_cast<int>(r));
    ns.push_back(r);
    values.push_back(coarea_mincut_min_phi(g, boundary_preset(g, "sign_x")).value);
  }
  double extrapolated = values.empty() ? 0.0 : values.back();
  if (values.size() >= 2) {
    // First order in the mesh width between the two finest resolutions.
    const double n1 = ns[ns.size() - 2], n2 = ns.back();
    const double v1 = values[values.size() - 2], v2 = values.back();
    extrapolated = v2 + (v2 - v1) * n1 / (n2 - n1);
  }
  io::write_table(ctx.dir / "oracle.csv", {"n", "value"}, {ns, values});
  save_solution(ctx.dir / "solver", rec.solution, rec.certificate, {{"phi", rec.phi}});
  emit_plot_data(ctx.dir, {"oracle_refinement", "Exact anisotropic minimum under refinement",
                           "n", "min Phi_h", false, {{"oracle", ns, values}}},
                 ctx.svg);
  ctx.summary["phi"] = rec.phi;
  ctx.summary["phi_primal"] = rec.phi_primal;
  ctx.summary["gap"] = rec.solution.gap;
  ctx.summary["oracle_values"] = values;
  ctx.summary["oracle_extrapolated"] = extrapolated;
  if (grid.kind() == GridKind::kDisk) ctx.summary["chord_value"] = 4.0 * grid.size();
}

void semigroup_decay(Context& ctx) {
  const Grid grid = config_grid(ctx.config);
  const SolverOptions opts = solver_options(ctx.config);
  const BoundaryData h0 = preset_or_file(grid, ctx.config.string("h0", "sign_x"));
  const double tau = ctx.config.number("tau", 0.05);
  const double t_end = ctx.config.number("t_end", 5.0);
  const NemytskiiSpec f = parse_nonlinearity(ctx.config, "f", "zero");
  const Trajectory traj = evolve(grid, h0, t_end, tau, {}, f, opts);
  ctx.converged = traj.converged;
  save_trajectory(ctx.dir / "trajectory", grid, traj, h0, ctx.config.flag("save_states", false));
  const DiagnosticsReport rep = diagnostics_report(traj, h0, grid);

  std::vector<double> phi, mass;
  for (const auto& d : traj.diagnostics) {
    phi.push_back(d.phi);
    mass.push_back(d.mass);
  }
  emit_plot_data(ctx.dir, {"phi", "Energy along the semigroup", "t", "phi(h(t))", false,
                           {{"phi", traj.times, phi}}}, ctx.svg);
  emit_plot_data(ctx.dir, {"mass", "Boundary mass", "t", "mass", false,
                           {{"mass", traj.times, mass}}}, ctx.svg);
  emit_plot_data(ctx.dir, {"spread", "Distance to the mean", "t", "||h - mean||_1", false,
                           {{"spread", traj.times, rep.spread}}}, ctx.svg);
  ctx.summary = to_json(rep);
}

void comparison_pairs(Context& ctx) {
  const Grid grid = config_grid(ctx.config);
  const SolverOptions opts = solver_options(ctx.config);
  const auto seed = static_cast<std::uint64_t>(ctx.config.integer("seed", 1));
  const double tau = ctx.config.number("tau", 0.1);
  const double t_end = ctx.config.number("t_end", 2.0);
  const double offset = ctx.config.number("offset", 0.5);
  const NemytskiiSpec f = parse_nonlinearity(ctx.config, "f", "linear:0.5");
  const BoundaryData a0 = boundary_preset(grid, "random:" + std::to_string(seed));
  BoundaryData b0 = a0;
  const auto bump = uniform_samples(seed + 1000003, grid.num_boundary());
  for (std::size_t k = 0; k < b0.values.size(); ++k) b0.values[k] += offset * bump[k];

  const Trajectory a = evolve(grid, a0, t_end, tau, {}, f, opts);
  const Trajectory b = evolve(grid, b0, t_end, tau, {}, f, opts);
  ctx.converged = a.converged && b.converged;
  save_trajectory(ctx.dir / "lower", grid, a, a0, false);
  save_trajectory(ctx.dir / "upper", grid, b, b0, false);
  const ComparisonReport rep = compare_trajectories(grid, a, b);
  const char* qn[3] = {"l1", "l2", "linf"};
  std::vector<Series> series;
  std::vector<std::string> header{"t"};
  std::vector<std::vector<double>> cols{a.times};
  for (int q = 0; q < 3; ++q) {
    Series s{std::string("full_") + qn[q], a.times, {}}, r{std::string("bound_") + qn[q], a.times, {}};
    std::vector<double> pos;
    for (std::size_t n = 0; n < a.times.size(); ++n) {
      s.y.push_back(rep.lhs[n][q][1]);
      r.y.push_back(rep.rhs[n][q][1]);
      pos.push_back(rep.lhs[n][q][0]);
    }
    header.insert(header.end(), {std::string("pos_") + qn[q], s.name, r.name});
    cols.insert(cols.end(), {pos, s.y, r.y});
    series.push_back(std::move(s));
    series.push_back(std::move(r));
  }
  io::write_table(ctx.dir / "comparison.csv", header, cols);
  emit_plot_data(ctx.dir, {"comparison", "Distance between ordered trajectories", "t",
                           "||h - h'||_q", false, series}, ctx.svg);
  Json excess = Json::object();
  for (int q = 0; q < 3; ++q) {
    excess[qn[q]] = {{"positive_part", rep.max_excess[q][0]}, {"full", rep.max_excess[q][1]}};
  }
  ctx.summary["max_excess"] = excess;
  ctx.summary["ordered"] = rep.ordered;
  ctx.summary["order_violation"] = rep.order_violation;
  ctx.summary["energy_excess_a"] = diagnostics_report(a, a0, grid).energy_excess;
  ctx.summary["energy_excess_b"] = diagnostics_report(b, b0, grid).energy_excess;
}

void plap_convergence(Context& ctx) {
  const Grid grid = config_grid(ctx.config);
  const SolverOptions opts = solver_options(ctx.config);
  const auto seed = static_cast<std::uint64_t>(ctx.config.integer("seed", 1));
  const BoundaryData g = preset_or_file(grid, ctx.config.string("g", "random:" + std::to_string(seed)));
  const double alpha = ctx.config.number("alpha", 1.0);
  const auto schedule = ctx.config.numbers("schedule", {1.8, 1.4, 1.2, 1.1, 1.05});
  PlapOptions po;
  po.epsilon = ctx.config.number("epsilon", po.epsilon);
  po.newton_tol = ctx.config.number("newton_tol", po.newton_tol);
  const ContinuationReport rep = continuation(grid, g, alpha, schedule, po, opts);
  ctx.converged = rep.limit.converged;
  std::vector<double> ps, dist, flux, res;
  for (const auto& e : rep.entries) {
    ps.push_back(e.p);
    dist.push_back(e.distance);
    flux.push_back(e.flux_deviation);
    res.push_back(e.residual);
    ctx.converged = ctx.converged && e.converged;
  }
  io::write_table(ctx.dir / "continuation.csv", {"p", "distance", "flux_deviation", "residual"},
                  {ps, dist, flux, res});
  io::write_csv(ctx.dir / "u_tv.csv", rep.limit.u.values);
  emit_plot_data(ctx.dir, {"continuation", "p-Laplace approximation of the Robin problem", "p",
                           "||u_p - u_TV||_1 / |domain|", true, {{"distance", ps, dist}}},
                 ctx.svg);
  ctx.summary["distance"] = dist;
  ctx.summary["flux_deviation"] = flux;
  ctx.summary["limit_gap"] = rep.limit.gap;
  ctx.summary["limit_energy"] = rep.limit.primal_energy;
}

void stability_sequence(Context& ctx) {
  const Grid grid = config_grid(ctx.config);
  const SolverOptions opts = solver_options(ctx.config);
  const auto seed = static_cast<std::uint64_t>(ctx.config.integer("seed", 1));
  const BoundaryData h = preset_or_file(grid, ctx.config.string("h", "sign_x"));
  const BoundaryData rho = boundary_preset(grid, "random:" + std::to_string(seed));
  const auto ns = ctx.config.numbers("n", {1.0, 2.0, 4.0, 8.0, 16.0});
  std::vector<BoundaryData> seq;
  for (double n : ns) {
    BoundaryData hn = h;
    for (std::size_t k = 0; k < hn.values.size(); ++k) hn.values[k] += rho.values[k] / n;
    seq.push_back(std::move(hn));
  }
  const std::vector<BoundaryData> tests{
      make_boundary(grid, 1.0), sample_boundary(grid, [](Vec2 p) { return p.x; }),
      sample_boundary(grid, [](Vec2 p) { return p.y; })};
  const StabilityReport rep = stability_probe(grid, h, seq, tests, opts);
  ctx.converged = rep.base.converged;
  std::vector<double> dist, dev, pair;
  for (const auto& e : rep.entries) {
    dist.push_back(e.distance);
    dev.push_back(e.phi_deviation);
    pair.push_back(*std::max_element(e.pairing_deviation.begin(), e.pairing_deviation.end()));
    ctx.converged = ctx.converged && e.converged;
  }
  io::write_table(ctx.dir / "stability.csv",
                  {"n", "distance", "phi_deviation", "pairing_deviation"}, {ns, dist, dev, pair});
  emit_plot_data(ctx.dir, {"stability", "Continuity of phi along h + rho / n", "n",
                           "deviation", false,
                           {{"phi_deviation", ns, dev}, {"distance", ns, dist}}},
                 ctx.svg);
  ctx.summary["distance"] = dist;
  ctx.summary["phi_deviation"] = dev;
  ctx.summary["pairing_deviation"] = pair;
  ctx.summary["phi"] = rep.base.phi_primal;
}

void extinction_probe(Context& ctx) {
  const Grid grid = config_grid(ctx.config);
  const SolverOptions opts = solver_options(ctx.config);
  const BoundaryData h0 = preset_or_file(grid, ctx.config.string("h0", "sign_x"));
  const double tau = ctx.config.number("tau", 0.05);
  const double t_max = ctx.config.number("t_max", 10.0);
  const double threshold = ctx.config.number("threshold", 1e-4);
  const auto steps = static_cast<std::size_t>(std::ceil(t_max / tau - 1e-9));

  auto sup_spread = [&](const BoundaryData& h) {
    const double m = boundary_mean(grid, h);
    double s = 0.0;
    for (double v : h.values) s = std::max(s, std::abs(v - m));
    return s;
  };
  std::vector<double> ts{0.0}, spread{sup_spread(h0)};
  BoundaryData h = h0;
  BoundaryData zero = make_boundary(grid, 0.0);
  BulkField u;
  DualField z;
  SolverOptions so = opts;
  if (so.abs_tolerance == 0.0) so.abs_tolerance = 1e-2 * opts.tolerance * tau * sup_norm(h0.values);
  double hit = -1.0;
  for (std::size_t n = 0; n < steps && hit < 0.0; ++n) {
    ResolventWarmStart warm{u.values.empty() ? nullptr : &u, z.interior.empty() ? nullptr : &z};
    StepResult st = implicit_euler_step(grid, h, tau, zero, NemytskiiSpec::zero(), so, warm);
    ctx.converged = ctx.converged && st.converged;
    h = std::move(st.h);
    u = std::move(st.u);
    z = std::move(st.z);
    ts.push_back(static_cast<double>(n + 1) * tau);
    spread.push_back(sup_spread(h));
    if (spread.back() <= threshold) hit = ts.back();
  }
  if (spread.front() <= threshold) hit = 0.0;
  io::write_table(ctx.dir / "extinction.csv", {"t", "sup_spread"}, {ts, spread});
  emit_plot_data(ctx.dir, {"extinction", "Sup distance to the mean", "t", "||h - mean||_inf",
                           true, {{"sup_spread", ts, spread}}}, ctx.svg);
  ctx.summary["threshold"] = threshold;
  ctx.summary["reached"] = hit >= 0.0;
  if (hit >= 0.0) {
    ctx.summary["extinction_time"] = hit;
  } else {
    ctx.summary["extinction_time"] = "not reached";
  }
}

using Recipe = void (*)(Context&);

const std::vector<std::pair<std::string, Recipe>>& registry() {
  static const std::vector<std::pair<std::string, Recipe>> r{
      {"disk_nonuniqueness", disk_nonuniqueness}, {"sign_data", sign_data},
      {"semigroup_decay", semigroup_decay},       {"comparison_pairs", comparison_pairs},
      {"plap_convergence", plap_convergence},     {"stability_sequence", stability_sequence},
      {"extinction_probe", extinction_probe}};
  return r;
}

}  // namespace

const std::vector<std::string>& recipe_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [k, v] : registry()) n.push_back(k);
    return n;
  }();
  return names;
}

ExperimentResult run_experiment(const Config& config, const fs::path& out_dir) {
  const std::string recipe = config.string("recipe");
  const auto& reg = registry();
  const auto it = std::find_if(reg.begin(), reg.end(),
                               [&](const auto& e) { return e.first == recipe; });
  if (it == reg.end()) throw ConfigError("unknown recipe '" + recipe + "'");
  config.string("grid");  // required by every recipe

  fs::create_directories(out_dir);
  io::write_json(out_dir / "config.json", config.json());
  Context ctx{config, out_dir, config.flag("svg", false)};
  it->second(ctx);
  ctx.summary["recipe"] = recipe;
  ctx.summary["converged"] = ctx.converged;
  io::write_json(out_dir / "report.json", ctx.summary);
  return {recipe, out_dir, ctx.summary, ctx.converged};
}

std::uint64_t directory_digest(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), dir));
  }
  std::sort(files.begin(), files.end());
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 1099511628211ull;
  };
  for (const auto& f : files) {
    for (char c : f.generic_string()) mix(static_cast<unsigned char>(c));
    mix(0);
    std::ifstream in(dir / f, std::ios::binary);
    for (char c; in.get(c);) mix(static_cast<unsigned char>(c));
    mix(0);
  }
  return h;
}

}  // namespace lsgrad::lab
