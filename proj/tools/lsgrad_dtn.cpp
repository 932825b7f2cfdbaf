// lsgrad-dtn: command line front end over the C interface.
//
// Exit codes: 0 success, 2 solver non-convergence (or a failed verify),
// 1 usage and every other error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lsgrad/lsgrad.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Failure {
  int code;
  std::string message;
};

// Throws on errors; returns true when the solver stopped early.
bool check(lsg_status s, const std::string& what) {
  if (s == LSG_OK) return false;
  if (s == LSG_NOT_CONVERGED) return true;
  throw Failure{1, what + ": " + lsg_status_name(s) + ": " + lsg_last_error()};
}

struct GridDeleter {
  void operator()(lsg_grid* g) const { lsg_grid_free(g); }
};
struct TrajDeleter {
  void operator()(lsg_trajectory* t) const { lsg_trajectory_free(t); }
};
using GridPtr = std::unique_ptr<lsg_grid, GridDeleter>;
using TrajPtr = std::unique_ptr<lsg_trajectory, TrajDeleter>;

GridPtr load_grid(const std::string& spec) {
  lsg_grid* g = nullptr;
  check(lsg_grid_resolve(spec.c_str(), &g), "grid '" + spec + "'");
  return GridPtr(g);
}

std::vector<double> read_field(const std::string& path) {
  double* data = nullptr;
  size_t n = 0;
  check(lsg_field_read(path.c_str(), &data, &n), "reading " + path);
  std::vector<double> v(data, data + n);
  lsg_buffer_free(data);
  return v;
}

void write_field(const fs::path& path, const std::vector<double>& v) {
  check(lsg_field_write(path.string().c_str(), v.data(), v.size()), "writing " + path.string());
}

// A data argument is a file when it exists, a preset otherwise. A bare
// "random" takes the global seed.
std::vector<double> boundary_arg(const lsg_grid* grid, const std::string& arg, uint64_t seed) {
  const std::size_t nb = lsg_grid_num_boundary(grid);
  if (fs::exists(arg)) {
    std::vector<double> v = read_field(arg);
    if (v.size() != nb) {
      throw Failure{1, arg + ": expected " + std::to_string(nb) + " boundary values, found " +
                           std::to_string(v.size())};
    }
    return v;
  }
  std::string spec = arg == "random" ? "random:" + std::to_string(seed) : arg;
  std::vector<double> v(nb);
  check(lsg_boundary_preset(grid, spec.c_str(), v.data()), "boundary data '" + arg + "'");
  return v;
}

void write_json(const fs::path& path, const json& j) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Failure{1, "cannot write " + path.string()};
  out << j.dump(2) << '\n';
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw Failure{1, "cannot parse number '" + item + "'"};
    }
  }
  return out;
}

json certificate_json(const lsg_certificate& c) {
  return {{"z_sup", c.z_sup},
          {"g_sup", c.g_sup},
          {"div_residual", c.div_residual},
          {"div_max", c.div_max},
          {"pairing_defect", c.pairing_defect},
          {"sign_defect", c.sign_defect},
          {"sign_defect_max", c.sign_defect_max},
          {"flux", c.flux}};
}

json solve_json(const lsg_solve_info& i) {
  return {{"primal_energy", i.primal_energy}, {"dual_energy", i.dual_energy},
          {"gap", i.gap},                     {"phi", i.phi},
          {"div_residual", i.div_residual},   {"div_max", i.div_max},
          {"iterations", i.iterations},       {"converged", i.converged != 0},
          {"certificate", certificate_json(i.certificate)}};
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

struct Globals {
  std::string out = "out";
  uint64_t seed = 1;
  double tol = 1e-6;
  int max_iters = 0;
  bool tol_given = false;
  bool seed_given = false;

  lsg_solver_options solver() const {
    lsg_solver_options o;
    lsg_solver_options_default(&o);
    o.tolerance = tol;
    o.div_tolerance = tol;
    if (max_iters > 0) o.max_iters = max_iters;
    return o;
  }
};

int report_status(bool stopped) {
  if (stopped) {
    std::cerr << "warning: solver stopped before reaching the tolerance\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Least-gradient problems and the Dirichlet-to-Neumann operator of the 1-Laplacian"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", lsg_version());
  Globals g;
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  auto* seed_opt = app.add_option("--seed", g.seed, "Seed for random data")->capture_default_str();
  auto* tol_opt = app.add_option("--tol", g.tol, "Relative solver tolerance")->capture_default_str();
  app.add_option("--max-iters", g.max_iters, "Iteration limit of the first-order solver");

  std::string grid_spec = "disk:64";
  auto add_grid = [&](CLI::App* sub) {
    sub->set_help_flag("--help", "Print this help message and exit");
    sub->add_option("--grid", grid_spec, "square:N[:side], disk:N[:radius] or grid JSON")
        ->capture_default_str();
  };

  // grid
  auto* grid_cmd = app.add_subcommand("grid", "Build a grid and write grid.json");
  add_grid(grid_cmd);

  // solve
  std::string h_arg = "sign_x";
  auto* solve_cmd = app.add_subcommand("solve", "Minimize tv(u) + int |h - Tu|");
  add_grid(solve_cmd);
  solve_cmd->add_option("--h", h_arg, "Boundary data: preset or field file")->capture_default_str();

  // dtn
  std::string lambdas_arg;
  auto* dtn_cmd = app.add_subcommand("dtn", "Evaluate phi(h) and a selection of Lambda(h)");
  add_grid(dtn_cmd);
  dtn_cmd->add_option("--h", h_arg, "Boundary data: preset or field file")->capture_default_str();
  dtn_cmd->add_option("--homogeneity", lambdas_arg, "Comma separated scalings to test");

  // resolvent
  std::string g_arg = "random";
  double lambda = 1.0;
  auto* res_cmd = app.add_subcommand("resolvent", "Apply (I + lambda Lambda)^-1");
  add_grid(res_cmd);
  res_cmd->add_option("--g", g_arg, "Boundary data: preset or field file")->capture_default_str();
  res_cmd->add_option("--lambda", lambda)->capture_default_str();

  // evolve
  double tau = 0.05, t_end = 1.0;
  std::string f_arg = "zero", source_arg;
  bool save_states = false;
  auto* evo_cmd = app.add_subcommand("evolve", "Implicit Euler flow h' + Lambda h + f(h) = source");
  add_grid(evo_cmd);
  evo_cmd->add_option("--h0", h_arg, "Initial data: preset or field file")->capture_default_str();
  evo_cmd->add_option("--tau", tau)->capture_default_str();
  evo_cmd->add_option("--t-end", t_end)->capture_default_str();
  evo_cmd->add_option("--f", f_arg, "zero or linear:OMEGA")->capture_default_str();
  evo_cmd->add_option("--source", source_arg, "Constant source: preset or field file");
  evo_cmd->add_flag("--states", save_states, "Write every state");

  // plap
  double alpha = 1.0, p = 1.5, eps = 1e-6;
  std::string schedule_arg;
  auto* plap_cmd = app.add_subcommand("plap", "p-Laplace Robin problem and its p -> 1 continuation");
  add_grid(plap_cmd);
  plap_cmd->add_option("--g", g_arg, "Boundary data: preset or field file")->capture_default_str();
  plap_cmd->add_option("--alpha", alpha)->capture_default_str();
  plap_cmd->add_option("--p", p)->capture_default_str();
  plap_cmd->add_option("--epsilon", eps, "Relative regularization")->capture_default_str();
  plap_cmd->add_option("--schedule", schedule_arg,
                       "Comma separated p values; runs the continuation against p = 1");

  // oracle
  bool exhaustive = false, compare = false;
  auto* oracle_cmd = app.add_subcommand("oracle", "Exact anisotropic minimum by min-cuts");
  add_grid(oracle_cmd);
  oracle_cmd->add_option("--h", h_arg, "Boundary data: preset or field file")->capture_default_str();
  oracle_cmd->add_flag("--exhaustive", exhaustive, "Brute force over level assignments");
  oracle_cmd->add_flag("--compare", compare, "Also run the first-order solver with the l1 edge norm");

  // experiment
  std::string config_path;
  bool list = false;
  auto* exp_cmd = app.add_subcommand("experiment", "Run a recipe from a configuration file");
  exp_cmd->set_help_flag("--help", "Print this help message and exit");
  exp_cmd->add_option("config", config_path, "JSON or key-value configuration");
  exp_cmd->add_flag("--list", list, "List the registered recipes");

  // verify
  std::string verify_dir;
  auto* ver_cmd = app.add_subcommand("verify", "Re-check a saved solution's certificate");
  add_grid(ver_cmd);
  ver_cmd->add_option("--h", h_arg, "Boundary data: preset or field file")->capture_default_str();
  ver_cmd->add_option("dir", verify_dir, "Directory with u.csv and z.csv")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  g.tol_given = tol_opt->count() > 0;
  g.seed_given = seed_opt->count() > 0;

  try {
    const fs::path out(g.out);
    const lsg_solver_options so = g.solver();

    if (grid_cmd->parsed()) {
      GridPtr grid = load_grid(grid_spec);
      fs::create_directories(out);
      check(lsg_grid_save(grid.get(), (out / "grid.json").string().c_str()), "saving grid");
      std::cout << "cells " << lsg_grid_num_cells(grid.get()) << "\nfaces "
                << lsg_grid_num_faces(grid.get()) << "\nboundary faces "
                << lsg_grid_num_boundary(grid.get()) << "\narea " << fmt(lsg_grid_area(grid.get()))
                << "\nperimeter " << fmt(lsg_grid_perimeter(grid.get())) << '\n';
      return 0;
    }

    if (solve_cmd->parsed()) {
      GridPtr grid = load_grid(grid_spec);
      const auto h = boundary_arg(grid.get(), h_arg, g.seed);
      lsg_solve_info info{};
      const bool stopped = check(lsg_solve_dirichlet_save(grid.get(), h.data(), &so,
                                                          out.string().c_str(), &info), "solve");
      std::cout << "energy " << fmt(info.primal_energy) << "\nlower bound "
                << fmt(info.dual_energy) << "\ngap " << fmt(info.gap) << "\niterations "
                << info.iterations << '\n';
      return report_status(stopped);
    }

    if (dtn_cmd->parsed()) {
      GridPtr grid = load_grid(grid_spec);
      const auto h = boundary_arg(grid.get(), h_arg, g.seed);
      lsg_solve_info info{};
      bool stopped = check(lsg_solve_dirichlet_save(grid.get(), h.data(), &so,
                                                    out.string().c_str(), &info), "dtn");
      std::cout << "phi " << fmt(info.phi) << "\nflux " << fmt(info.certificate.flux)
                << "\ngap " << fmt(info.gap) << '\n';
      if (!lambdas_arg.empty()) {
        const auto lams = parse_list(lambdas_arg);
        std::vector<lsg_homogeneity_entry> e(lams.size());
        double base = 0.0;
        stopped = check(lsg_homogeneity(grid.get(), h.data(), lams.data(), lams.size(), &so,
                                        e.data(), &base), "homogeneity") || stopped;
        json rows = json::array();
        for (const auto& x : e) {
          rows.push_back({{"lambda", x.lambda}, {"phi", x.phi},
                          {"relative_deviation", x.relative_deviation}, {"gap", x.gap},
                          {"cross_gap", x.cross_gap}, {"cross_bound", x.cross_bound},
                          {"converged", x.converged != 0}});
          std::cout << "lambda " << fmt(x.lambda) << " phi " << fmt(x.phi) << " rel_dev "
                    << fmt(x.relative_deviation) << '\n';
        }
        write_json(out / "homogeneity.json", {{"phi", base}, {"entries", rows}});
      }
      return report_status(stopped);
    }

    if (res_cmd->parsed()) {
      GridPtr grid = load_grid(grid_spec);
      const auto gv = boundary_arg(grid.get(), g_arg, g.seed);
      std::vector<double> h(gv.size()), sel(gv.size()), u(lsg_grid_num_cells(grid.get()));
      lsg_resolvent_info info{};
      const bool stopped = check(lsg_resolvent(grid.get(), gv.data(), lambda, &so, h.data(),
                                               sel.data(), u.data(), &info), "resolvent");
      write_field(out / "g.csv", gv);
      write_field(out / "h.csv", h);
      write_field(out / "selection.csv", sel);
      write_field(out / "u.csv", u);
      write_json(out / "report.json",
                 {{"lambda", lambda}, {"phi", info.phi}, {"gap", info.gap},
                  {"div_residual", info.div_residual}, {"sign_defect", info.sign_defect},
                  {"iterations", info.iterations}, {"converged", info.converged != 0}});
      std::cout << "phi(h) " << fmt(info.phi) << "\ngap " << fmt(info.gap) << '\n';
      return report_status(stopped);
    }

    if (evo_cmd->parsed()) {
      GridPtr grid = load_grid(grid_spec);
      const auto h0 = boundary_arg(grid.get(), h_arg, g.seed);
      std::vector<double> src;
      if (!source_arg.empty()) src = boundary_arg(grid.get(), source_arg, g.seed);
      lsg_nonlinearity f{LSG_F_ZERO, 0.0, nullptr, nullptr, 0};
      if (f_arg.rfind("linear:", 0) == 0) {
        f.kind = LSG_F_LINEAR;
        f.omega = parse_list(f_arg.substr(7)).at(0);
      } else if (f_arg != "zero") {
        throw Failure{1, "unknown nonlinearity '" + f_arg + "'"};
      }
      lsg_trajectory* raw = nullptr;
      const bool stopped = check(lsg_evolve(grid.get(), h0.data(), t_end, tau,
                                            src.empty() ? nullptr : src.data(), &f, &so, &raw),
                                 "evolve");
      TrajPtr traj(raw);
      check(lsg_trajectory_save(traj.get(), out.string().c_str(), save_states ? 1 : 0),
            "saving trajectory");
      lsg_evolution_report rep{};
      check(lsg_trajectory_report(traj.get(), &rep), "report");
      const std::size_t last = lsg_trajectory_num_states(traj.get()) - 1;
      lsg_step_diagnostics d{};
      check(lsg_trajectory_diagnostics(traj.get(), last, &d), "diagnostics");
      std::cout << "steps " << last << "\nphi(T) " << fmt(d.phi) << "\nmass drift "
                << fmt(rep.mass_drift) << "\nenergy excess " << fmt(rep.energy_excess)
                << "\nspread " << fmt(rep.spread_initial) << " -> " << fmt(rep.spread_final)
                << '\n';
      return report_status(stopped);
    }

    if (plap_cmd->parsed()) {
      GridPtr grid = load_grid(grid_spec);
      const auto gv = boundary_arg(grid.get(), g_arg, g.seed);
      lsg_plap_options po;
      lsg_plap_options_default(&po);
      po.p = p;
      po.epsilon = eps;
      std::vector<double> u(lsg_grid_num_cells(grid.get()));
      if (schedule_arg.empty()) {
        lsg_plap_info info{};
        const bool stopped =
            check(lsg_plap_solve(grid.get(), gv.data(), alpha, &po, u.data(), &info), "plap");
        write_field(out / "u.csv", u);
        write_json(out / "report.json",
                   {{"p", p}, {"alpha", alpha}, {"energy", info.energy},
                    {"residual", info.residual}, {"newton_iterations", info.newton_iterations},
                    {"converged", info.converged != 0}});
        std::cout << "energy " << fmt(info.energy) << "\nresidual " << fmt(info.residual)
                  << "\nnewton iterations " << info.newton_iterations << '\n';
        return report_status(stopped);
      }
      const auto schedule = parse_list(schedule_arg);
      std::vector<lsg_continuation_entry> e(schedule.size());
      const bool stopped = check(lsg_plap_continuation(grid.get(), gv.data(), alpha,
                                                       schedule.data(), schedule.size(), &po,
                                                       &so, e.data(), u.data()),
                                 "continuation");
      write_field(out / "u_tv.csv", u);
      json rows = json::array();
      for (const auto& x : e) {
        rows.push_back({{"p", x.p}, {"distance", x.distance},
                        {"flux_deviation", x.flux_deviation}, {"energy", x.energy},
                        {"residual", x.residual}, {"converged", x.converged != 0}});
        std::cout << "p " << fmt(x.p) << " distance " << fmt(x.distance) << '\n';
      }
      write_json(out / "continuation.json", {{"alpha", alpha}, {"entries", rows}});
      return report_status(stopped);
    }

    if (oracle_cmd->parsed()) {
      GridPtr grid = load_grid(grid_spec);
      const auto h = boundary_arg(grid.get(), h_arg, g.seed);
      double value = 0.0;
      json report;
      if (exhaustive) {
        check(lsg_oracle_exhaustive(grid.get(), h.data(), &value), "oracle");
        report = {{"value", value}, {"method", "exhaustive"}};
      } else {
        std::vector<double> u(lsg_grid_num_cells(grid.get()));
        int nested = 0;
        check(lsg_oracle_min_phi(grid.get(), h.data(), &value, u.data(), &nested), "oracle");
        write_field(out / "u.csv", u);
        report = {{"value", value}, {"method", "mincut"}, {"nested", nested != 0}};
      }
      std::cout << "min phi " << fmt(value) << '\n';
      bool stopped = false;
      if (compare) {
        std::vector<double> u(lsg_grid_num_cells(grid.get())),
            zi(lsg_grid_num_faces(grid.get())), gb(h.size());
        lsg_solve_info info{};
        stopped = check(lsg_solve_dirichlet(grid.get(), h.data(), &so, 1, u.data(), zi.data(),
                                            gb.data(), &info), "solve");
        const double rel = value > 0 ? std::abs(info.primal_energy - value) / value
                                     : std::abs(info.primal_energy);
        report["solver"] = solve_json(info);
        report["relative_difference"] = rel;
        std::cout << "solver " << fmt(info.primal_energy) << "\nrelative difference " << fmt(rel)
                  << '\n';
      }
      write_json(out / "report.json", report);
      return report_status(stopped);
    }

    if (exp_cmd->parsed()) {
      if (list) {
        for (size_t i = 0; i < lsg_recipe_count(); ++i) std::cout << lsg_recipe_name(i) << '\n';
        return 0;
      }
      if (config_path.empty()) throw Failure{1, "experiment needs a configuration file"};
      std::ifstream in(config_path);
      if (!in) throw Failure{1, "cannot open " + config_path};
      std::stringstream text;
      text << in.rdbuf();
      json overrides = json::object();
      if (g.tol_given) overrides["tolerance"] = g.tol;
      if (g.seed_given) overrides["seed"] = g.seed;
      if (g.max_iters > 0) overrides["max_iters"] = g.max_iters;
      lsg_experiment_info info{};
      const bool stopped = check(lsg_experiment_run(text.str().c_str(), overrides.dump().c_str(),
                                                    out.string().c_str(), &info),
                                 "experiment");
      char digest[20];
      std::snprintf(digest, sizeof digest, "%016llx",
                    static_cast<unsigned long long>(info.digest));
      std::cout << "results " << out.string() << "\ndigest " << digest << '\n';
      return report_status(stopped);
    }

    if (ver_cmd->parsed()) {
      GridPtr grid = load_grid(grid_spec);
      const auto h = boundary_arg(grid.get(), h_arg, g.seed);
      const fs::path dir(verify_dir);
      const auto u = read_field((dir / "u.csv").string());
      const auto z = read_field((dir / "z.csv").string());
      const std::size_t nf = lsg_grid_num_faces(grid.get());
      if (u.size() != lsg_grid_num_cells(grid.get()) || z.size() != nf + h.size()) {
        throw Failure{1, "saved fields do not match the grid"};
      }
      double primal = 0.0, dual = 0.0;
      lsg_certificate cert{};
      check(lsg_energy(grid.get(), h.data(), u.data(), 0, &primal), "energy");
      check(lsg_dual_bound(grid.get(), h.data(), z.data(), z.data() + nf, &dual), "dual bound");
      check(lsg_certify(grid.get(), h.data(), u.data(), z.data(), z.data() + nf, &cert),
            "certificate");
      const double gap = primal - dual;
      const double scale = std::max(std::abs(primal), 1e-12);
      const double perim = lsg_grid_perimeter(grid.get());
      const bool ok = cert.z_sup <= 1.0 + 1e-9 && gap <= g.tol * scale &&
                      cert.div_residual <= g.tol * perim;
      write_json(out / "verify.json", {{"primal_energy", primal}, {"dual_bound", dual},
                                       {"gap", gap}, {"certificate", certificate_json(cert)},
                                       {"tolerance", g.tol}, {"passed", ok}});
      std::cout << "energy " << fmt(primal) << "\nlower bound " << fmt(dual) << "\nrelative gap "
                << fmt(gap / scale) << "\ndiv residual " << fmt(cert.div_residual / perim)
                << "\nz sup " << fmt(cert.z_sup) << '\n'
                << (ok ? "certificate verified" : "certificate NOT verified") << '\n';
      return ok ? 0 : 2;
    }
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << '\n';
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
