#include "gdyne/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gdyne/conditional.hpp"
#include "gdyne/fisher.hpp"
#include "gdyne/fock.hpp"
#include "gdyne/moments.hpp"
#include "gdyne/qfi.hpp"

namespace gdyne::cli {

using json = nlohmann::json;

namespace {

// Thrown for bad user input; maps to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json jnum(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;
  json result = json::object();
  bool failed = false;  // any row carries a numerical failure
};

void emit(const Table& tab, const json& meta, const std::string& format, std::ostream& out) {
  if (format == "json") {
    json doc;
    doc["meta"] = meta;
    doc["columns"] = tab.columns;
    doc["rows"] = tab.rows;
    doc["result"] = tab.result;
    out << doc.dump(1) << '\n';
    return;
  }
  out << "# " << meta.dump() << '\n';
  for (std::size_t i = 0; i < tab.columns.size(); ++i) out << (i ? "," : "") << tab.columns[i];
  out << '\n';
  for (const auto& row : tab.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      const json& v = row[i];
      if (v.is_number_float()) out << num(v.get<double>());
      else if (v.is_number()) out << v.dump();
      else if (v.is_null()) out << "nan";
      else if (v.is_string()) out << v.get<std::string>();
      else out << v.dump();
    }
    out << '\n';
  }
  if (!tab.result.empty()) out << "# result " << tab.result.dump() << '\n';
}

struct Common {
  double kappa = 1;
  int threads = 0;
  std::string format = "csv";
  std::string out_path;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--kappa", c.kappa, "loss rate (reference scale)");
  sub->add_option("--threads", c.threads, "worker threads (env GDYNE_THREADS as fallback)");
  sub->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--out", c.out_path, "output file (stdout if omitted)");
}

// Frequency point given as omega plus either eps or deps.
struct Point {
  double omega = 0.2;
  double eps = std::numeric_limits<double>::quiet_NaN();
  double deps = std::numeric_limits<double>::quiet_NaN();

  System system(double kappa) const {
    if (std::isnan(eps) == std::isnan(deps)) throw ConfigError("give exactly one of --eps / --deps");
    return std::isnan(eps) ? System::near_boundary(omega, deps, kappa) : System::make(omega, eps, kappa);
  }
};

void add_point(CLI::App* sub, Point& pt) {
  sub->add_option("--omega", pt.omega, "detuning omega (units of kappa)");
  sub->add_option("--eps", pt.eps, "two-photon drive epsilon");
  sub->add_option("--deps", pt.deps, "boundary distance eps_c - eps");
}

struct MeasOpts {
  double s = 0, phi = 0.6, eta = 1;
};

void add_meas(CLI::App* sub, MeasOpts& m) {
  sub->add_option("--s", m.s, "general-dyne squeezing degree in [0,1]");
  sub->add_option("--phi", m.phi, "general-dyne squeezing angle");
  sub->add_option("--eta", m.eta, "detection efficiency");
}

std::vector<double> grid_or_fail(const std::string& spec, const char* name) {
  std::vector<double> g;
  try {
    g = parse_grid(spec);
  } catch (const std::exception& e) {
    throw ConfigError(std::string(name) + ": " + e.what());
  }
  if (g.empty()) throw ConfigError(std::string(name) + ": empty grid");
  return g;
}

// ---- commands -------------------------------------------------------------

struct SteadyArgs {
  MeasOpts m;
  double deps = 0;
  std::string eta_list = "1";
  std::string omega_grid;
  SteadyOptions opt;
};

Table cmd_steady(const SteadyArgs& a, const Common& c, json& meta) {
  const auto etas = grid_or_fail(a.eta_list, "--eta");
  const auto omegas = grid_or_fail(a.omega_grid, "--omega");
  for (double eta : etas) Measurement::make(a.m.s, a.m.phi, eta);
  meta["thresholds"] = {{"tol", a.opt.tol}, {"dt", a.opt.dt}, {"t_max", a.opt.t_max},
                        {"blowup", a.opt.blowup}, {"growth_window", 0.2}};
  struct Row {
    SteadyResult r;
    std::string status;
  };
  std::vector<Row> rows(etas.size() * omegas.size());
  std::vector<System> systems;
  for (double w : omegas) systems.push_back(System::near_boundary(w, a.deps, c.kappa));
  parallel_for(rows.size(), resolve_threads(c.threads), [&](std::size_t i) {
    const double eta = etas[i / omegas.size()];
    const System& p = systems[i % omegas.size()];
    try {
      rows[i].r = steady_covariance(p, Measurement::make(a.m.s, a.m.phi, eta), a.opt);
      rows[i].status = to_string(rows[i].r.status);
    } catch (const Error& e) {
      rows[i].status = std::string("error:") + to_string(e.kind());
    }
  });
  Table t;
  t.columns = {"omega", "eta", "sigma_x", "sigma_p", "sigma_xp", "status"};
  json located = json::array();
  for (std::size_t ie = 0; ie < etas.size(); ++ie) {
    std::vector<SteadyResult> scan;
    for (std::size_t iw = 0; iw < omegas.size(); ++iw) {
      const Row& r = rows[ie * omegas.size() + iw];
      const bool ok = r.status.rfind("error", 0) != 0;
      t.failed |= !ok;
      t.rows.push_back({omegas[iw], etas[ie], ok ? jnum(r.r.sigma(0, 0)) : json(nullptr),
                        ok ? jnum(r.r.sigma(1, 1)) : json(nullptr),
                        ok ? jnum(r.r.sigma(0, 1)) : json(nullptr), r.status});
      scan.push_back(r.r);
    }
    const std::size_t k = divergence_peak(scan);
    located.push_back({{"eta", etas[ie]}, {"omega_peak", omegas[k]},
                       {"status_at_peak", to_string(scan[k].status)}});
  }
  t.result["divergence"] = located;
  return t;
}

struct BecpArgs {
  MeasOpts m{0, 0.6, 0.8};
  std::string ladder = "0.03,0.02,0.01,0.005";
  std::string omega_grid;
  double t_probe = 100, dt = 1e-3;
};

Table cmd_becp(const BecpArgs& a, const Common& c, json& meta) {
  if (!(a.m.eta > 0)) throw ConfigError("detection requires eta > 0");
  const Measurement m = Measurement::make(a.m.s, a.m.phi, a.m.eta);
  const auto ladder = grid_or_fail(a.ladder, "--deps");
  const auto [w_be, e_be] = becp_from_angle(a.m.phi, c.kappa);
  std::vector<double> omegas;
  if (a.omega_grid.empty()) {
    for (int i = -50; i <= 20; ++i) omegas.push_back(w_be + 1e-3 * i * c.kappa);
  } else {
    omegas = grid_or_fail(a.omega_grid, "--omega");
  }
  meta["omega_grid"] = omegas;
  Table t;
  t.columns = {"delta_eps", "omega_min", "omega_be"};
  for (double d : ladder) {
    const auto prof = photocurrent_variance_profile(omegas, d, m, a.t_probe, c.kappa, a.dt, c.threads);
    t.rows.push_back({d, prof.omega_min, w_be});
  }
  t.result = {{"omega_be", w_be}, {"epsilon_be", e_be}};
  return t;
}

struct OptArgs {
  Point pt;
  double eta = 1;
  OptimizeOptions opt;
};

Table cmd_optimize(const OptArgs& a, const Common& c, json& meta) {
  const System p = a.pt.system(c.kappa);
  Measurement::make(0, 0, a.eta);
  OptimizeOptions o = a.opt;
  o.threads = c.threads;
  meta["thresholds"] = {{"rel_tol", o.fisher.rel_tol}, {"dt", o.fisher.dt}, {"t_max", o.fisher.t_max}};
  const OptimizationResult r = optimize_measurement(p, a.eta, o);
  Table t;
  t.columns = {"stage", "s", "phi", "k_F"};
  for (const auto& tp : r.trace) t.rows.push_back({tp.simplex ? "simplex" : "grid", tp.s, tp.phi, jnum(tp.k_F)});
  const double kG = qfi_rate_analytic(p).k_G;
  t.result = {{"s_opt", r.s_opt}, {"phi_opt", r.phi_opt}, {"k_F_opt", r.k_F_opt}, {"k_G", kG},
              {"ratio", r.k_F_opt / kG}, {"s_at_clamp", r.s_at_clamp}};
  return t;
}

struct QfiArgs {
  Point pt;
  std::string method = "analytic";
  double t_end = 0;  // 0: long enough for the slowest mode to settle
  int samples = 81;
  double h = 0;      // 0: keep h^2 I_G(t_end) around 1e-3
  FockOptions fock;
};

// The occupation relaxes at 2 Re(lambda_-), which becomes slow near the boundary.
double auto_horizon(const System& p) {
  const double rate = 2 * langevin_coefficients(p).lambda_minus.real();
  return std::max(80.0, std::ceil(12.0 / rate));
}

Table cmd_qfi(const QfiArgs& a, const Common& c, json& meta) {
  const System p = a.pt.system(c.kappa);
  // Exactly on the boundary is left to the solvers (OnBoundary); beyond it is bad input.
  if (p.epsilon > critical_amplitude(p.omega, p.kappa))
    throw Error(ErrorKind::OutsidePhase, "epsilon must not exceed epsilon_c");
  Table t;
  if (a.method == "analytic") {
    const KgComponents k = qfi_rate_analytic(p);
    t.columns = {"name", "re", "im"};
    auto row = [&](const char* n, cd v) { t.rows.push_back({n, v.real(), v.imag()}); };
    row("Lambda1", k.Lambda1);
    row("Lambda2", k.Lambda2);
    row("Lambda3", k.Lambda3);
    row("kG1", k.kG1);
    row("kG2", k.kG2);
    row("kG3", k.kG3);
    row("kG4", k.kG4);
    t.result = {{"k_G", k.k_G}};
    return t;
  }
  if (a.samples < 2) throw ConfigError("--samples must be >= 2");
  const double t_end = a.t_end > 0 ? a.t_end : auto_horizon(p);
  meta["t_end"] = t_end;
  if (a.method == "time") {
    std::vector<double> times;
    for (int i = 0; i < a.samples; ++i) times.push_back(t_end * i / (a.samples - 1));
    const QfiSeries s = qfi_time_domain(p, times);
    t.columns = {"t", "I_G"};
    for (std::size_t i = 0; i < s.t.size(); ++i) t.rows.push_back({s.t[i], s.I_G[i]});
    const LinearFit f = late_window_fit(s.t, s.I_G, 0.25);
    t.result = {{"slope", f.slope}, {"r2", f.r2}, {"fit_window", {f.t_lo, f.t_hi}}};
    return t;
  }
  if (a.method == "fock") {
    FockOptions fo = a.fock;
    fo.sample_every = std::max<std::size_t>(1, std::llround(t_end / (a.samples - 1) / fo.dt));
    const double h = a.h > 0 ? a.h : std::min(1e-3, std::sqrt(1e-3 / (qfi_rate_analytic(p).k_G * t_end)));
    meta["fock"] = {{"dim", fo.dim}, {"dt", fo.dt}, {"h", h}};
    const FdQfiResult r = qfi_finite_difference(p, h, t_end, fo, c.threads);
    t.columns = {"t", "I_G", "I_G_half_step"};
    for (std::size_t i = 0; i < r.t.size(); ++i) t.rows.push_back({r.t[i], r.I_G[i], r.I_G_half[i]});
    t.result = {{"slope", r.slope}, {"slope_half_step", r.slope_half}, {"r2", r.r2}};
    return t;
  }
  throw ConfigError("--method must be analytic, time or fock");
}

struct FisherArgs {
  Point pt;
  MeasOpts m;
  FisherOptions opt;
};

Table cmd_fisher(const FisherArgs& a, const Common& c, json& meta) {
  const System p = a.pt.system(c.kappa);
  const Measurement m = Measurement::make(a.m.s, a.m.phi, a.m.eta);
  meta["thresholds"] = {{"rel_tol", a.opt.rel_tol}, {"dt", a.opt.dt}, {"t_max", a.opt.t_max},
                        {"fit_fraction", 0.25}};
  const FisherResult r = fisher_information(p, m, a.opt);
  Table t;
  t.columns = {"t", "F"};
  for (std::size_t i = 0; i < r.t.size(); ++i) t.rows.push_back({r.t[i], r.F[i]});
  t.result = {{"k_F", r.k_F}, {"k_F_fit", r.k_F_fit}, {"fit_r2", r.fit_r2},
              {"fit_window", {r.fit_t_lo, r.fit_t_hi}}, {"converged", r.converged},
              {"t_converged", r.t_converged}};
  t.failed = !r.converged;
  return t;
}

struct TrajArgs {
  Point pt;
  MeasOpts m;
  double t_end = 10, dt = 1e-3;
  std::uint64_t seed = 42;
  std::size_t ensemble = 0;
  std::size_t sample_every = 100;
  std::string probes;
};

Table cmd_trajectory(const TrajArgs& a, const Common& c, json&) {
  const System p = a.pt.system(c.kappa);
  const Measurement m = Measurement::make(a.m.s, a.m.phi, a.m.eta);
  if (!(a.m.eta > 0)) throw ConfigError("trajectories require eta > 0");
  Table t;
  if (a.ensemble < 2) {
    TrajectoryOptions o;
    o.dt = a.dt;
    o.sample_every = std::max<std::size_t>(1, a.sample_every);
    const Trajectory tr = simulate_trajectory(p, m, GaussianState{}, a.t_end, a.seed, o);
    t.columns = {"t", "x", "p", "y1", "y2"};
    for (const auto& s : tr.samples) t.rows.push_back({s.t, s.r(0), s.r(1), s.y(0), s.y(1)});
    return t;
  }
  std::vector<double> probes;
  if (a.probes.empty()) {
    for (int i = 1; i <= 5; ++i) probes.push_back(a.t_end * i / 5);
  } else {
    probes = grid_or_fail(a.probes, "--probe");
  }
  EnsembleOptions o;
  o.dt = a.dt;
  o.threads = c.threads;
  const auto pts = ensemble_statistics(p, m, probes, a.ensemble, a.seed, o);
  t.columns = {"t", "r_x", "se_r_x", "r_p", "se_r_p", "Err_xx", "se_Err_xx", "Err_xp", "se_Err_xp",
               "Err_pp", "se_Err_pp", "Edrdr_xx", "se_Edrdr_xx", "Edrdr_pp", "se_Edrdr_pp", "Eyy",
               "se_Eyy"};
  for (const auto& e : pts)
    t.rows.push_back({e.t, e.mean_r(0), e.se_r(0), e.mean_r(1), e.se_r(1), e.Err(0, 0), e.se_Err(0, 0),
                      e.Err(0, 1), e.se_Err(0, 1), e.Err(1, 1), e.se_Err(1, 1), e.Edrdr(0, 0),
                      e.se_Edrdr(0, 0), e.Edrdr(1, 1), e.se_Edrdr(1, 1), e.Eyy, e.se_Eyy});
  return t;
}

struct LandArgs {
  MeasOpts m;
  std::string omega_grid, eps_grid, deps_grid;
  FisherOptions opt;
};

Table cmd_landscape(const LandArgs& a, const Common& c, json&) {
  const Measurement m = Measurement::make(a.m.s, a.m.phi, a.m.eta);
  const auto omegas = grid_or_fail(a.omega_grid, "--omega");
  Table t;
  t.columns = {"omega", "epsilon", "k_F", "status"};
  if (a.eps_grid.empty() == a.deps_grid.empty()) throw ConfigError("give exactly one of --eps / --deps grids");
  if (!a.eps_grid.empty()) {
    const auto eps = grid_or_fail(a.eps_grid, "--eps");
    for (const auto& cell : kf_landscape(omegas, eps, m, c.kappa, a.opt, c.threads)) {
      t.rows.push_back({cell.omega, cell.epsilon, jnum(cell.k_F), cell.status});
      t.failed |= !cell.ok && cell.status != "OutsidePhase";
    }
    return t;
  }
  // Along fixed boundary distance: one epsilon per omega.
  const auto deps = grid_or_fail(a.deps_grid, "--deps");
  for (double d : deps) {
    std::vector<LandscapeCell> cells(omegas.size());
    parallel_for(omegas.size(), resolve_threads(c.threads), [&](std::size_t i) {
      const double e = critical_amplitude(omegas[i], c.kappa) - d;
      cells[i] = kf_landscape({omegas[i]}, {e}, m, c.kappa, a.opt, 1).front();
    });
    for (const auto& cell : cells) {
      t.rows.push_back({cell.omega, cell.epsilon, jnum(cell.k_F), cell.status});
      t.failed |= !cell.ok && cell.status != "OutsidePhase";
    }
  }
  return t;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
             bool from_replay);

int cmd_replay(const std::string& file, const Common& c, std::ostream& out, std::ostream& err) {
  std::ifstream in(file);
  std::string line;
  if (!in || !std::getline(in, line)) throw ConfigError("cannot read " + file);
  json meta;
  if (line.rfind("# ", 0) == 0) {
    meta = json::parse(line.substr(2), nullptr, false);
  } else {
    in.seekg(0);
    json doc = json::parse(in, nullptr, false);
    if (!doc.is_discarded() && doc.contains("meta")) meta = doc["meta"];
  }
  if (meta.is_discarded() || !meta.contains("argv")) throw ConfigError("no run configuration in " + file);
  std::vector<std::string> args;
  const auto argv = meta["argv"].get<std::vector<std::string>>();
  for (std::size_t i = 0; i < argv.size(); ++i) {
    if (argv[i] == "--out") {
      ++i;
      continue;
    }
    if (argv[i].rfind("--out=", 0) == 0) continue;
    args.push_back(argv[i]);
  }
  if (!c.out_path.empty()) {
    args.push_back("--out");
    args.push_back(c.out_path);
  }
  return dispatch(args, out, err, true);
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
             bool from_replay) {
  CLI::App app{"Gaussian general-dyne simulator for the monitored parametric oscillator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Common common;
  SteadyArgs steady;
  auto* s_steady = app.add_subcommand("steady", "steady conditional covariance along omega");
  add_common(s_steady, common);
  s_steady->add_option("--phi", steady.m.phi);
  s_steady->add_option("--s", steady.m.s);
  s_steady->add_option("--deps", steady.deps, "boundary distance");
  s_steady->add_option("--eta", steady.eta_list, "efficiency list");
  s_steady->add_option("--omega", steady.omega_grid, "omega grid start:stop:step or list")->required();
  s_steady->add_option("--dt", steady.opt.dt);
  s_steady->add_option("--t-max", steady.opt.t_max);
  s_steady->add_option("--tol", steady.opt.tol);

  BecpArgs becp;
  auto* s_becp = app.add_subcommand("becp-detect", "photocurrent-variance minima over a deps ladder");
  add_common(s_becp, common);
  add_meas(s_becp, becp.m);
  s_becp->add_option("--deps", becp.ladder, "ladder of boundary distances");
  s_becp->add_option("--omega", becp.omega_grid, "omega grid (default: around omega_be)");
  s_becp->add_option("--t-probe", becp.t_probe);
  s_becp->add_option("--dt", becp.dt);

  OptArgs optim;
  double phi_max = 0;
  auto* s_opt = app.add_subcommand("optimize", "maximize k_F over (phi, s)");
  add_common(s_opt, common);
  add_point(s_opt, optim.pt);
  s_opt->add_option("--eta", optim.eta);
  s_opt->add_option("--budget", optim.opt.budget);
  s_opt->add_option("--grid-phi", optim.opt.grid_phi);
  s_opt->add_option("--grid-s", optim.opt.grid_s);
  s_opt->add_option("--phi-min", optim.opt.phi_lo);
  s_opt->add_option("--phi-max", phi_max, "widen the phi box beyond pi/4");
  s_opt->add_option("--dt", optim.opt.fisher.dt);

  QfiArgs qfi;
  auto* s_qfi = app.add_subcommand("qfi", "global QFI growth");
  add_common(s_qfi, common);
  add_point(s_qfi, qfi.pt);
  s_qfi->add_option("--method", qfi.method)->check(CLI::IsMember({"analytic", "time", "fock"}));
  s_qfi->add_option("--t-end", qfi.t_end);
  s_qfi->add_option("--samples", qfi.samples);
  s_qfi->add_option("--step", qfi.h, "stencil step h");
  s_qfi->add_option("--dim", qfi.fock.dim, "Fock truncation");
  s_qfi->add_option("--dt", qfi.fock.dt);

  FisherArgs fisher;
  auto* s_fisher = app.add_subcommand("fisher", "continuous-monitoring Fisher information F(t)");
  add_common(s_fisher, common);
  add_point(s_fisher, fisher.pt);
  add_meas(s_fisher, fisher.m);
  s_fisher->add_option("--t-end", fisher.opt.t_end);
  s_fisher->add_option("--dt", fisher.opt.dt);

  TrajArgs traj;
  auto* s_traj = app.add_subcommand("trajectory", "stochastic trajectories or ensemble statistics");
  add_common(s_traj, common);
  add_point(s_traj, traj.pt);
  add_meas(s_traj, traj.m);
  s_traj->add_option("--t-end", traj.t_end);
  s_traj->add_option("--dt", traj.dt);
  s_traj->add_option("--seed", traj.seed);
  s_traj->add_option("--seeds", traj.seed, "alias of --seed (first seed of the ensemble)");
  s_traj->add_option("--ensemble", traj.ensemble, "number of trajectories (0: single raw run)");
  s_traj->add_option("--sample-every", traj.sample_every);
  s_traj->add_option("--probe", traj.probes, "probe times for ensemble statistics");

  LandArgs land;
  auto* s_land = app.add_subcommand("landscape", "k_F over an (omega, eps) grid");
  add_common(s_land, common);
  add_meas(s_land, land.m);
  s_land->add_option("--omega", land.omega_grid)->required();
  s_land->add_option("--eps", land.eps_grid);
  s_land->add_option("--deps", land.deps_grid);
  s_land->add_option("--dt", land.opt.dt);

  std::string replay_file;
  auto* s_replay = app.add_subcommand("replay", "re-run the configuration embedded in an output file");
  add_common(s_replay, common);
  s_replay->add_option("--file", replay_file)->required();

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n' << app.help();
    return 2;
  }

  auto* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  if (name == "replay") {
    if (from_replay) throw ConfigError("nested replay");
    return cmd_replay(replay_file, common, out, err);
  }

  json meta;
  meta["command"] = name;
  meta["version"] = kVersion;
  json argv = json::array();  // the output path is not part of the configuration
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--out") ++i;
    else if (args[i].rfind("--out=", 0) != 0) argv.push_back(args[i]);
  }
  meta["argv"] = argv;
  meta["kappa"] = common.kappa;
  if (phi_max > 0) optim.opt.phi_hi = phi_max;

  Table tab;
  try {
    if (name == "steady") tab = cmd_steady(steady, common, meta);
    else if (name == "becp-detect") tab = cmd_becp(becp, common, meta);
    else if (name == "optimize") tab = cmd_optimize(optim, common, meta);
    else if (name == "qfi") tab = cmd_qfi(qfi, common, meta);
    else if (name == "fisher") tab = cmd_fisher(fisher, common, meta);
    else if (name == "trajectory") tab = cmd_trajectory(traj, common, meta);
    else if (name == "landscape") tab = cmd_landscape(land, common, meta);
  } catch (const Error& e) {
    const bool config = e.kind() == ErrorKind::InvalidParameter || e.kind() == ErrorKind::EtaZero ||
                        e.kind() == ErrorKind::AngleOutOfRange || e.kind() == ErrorKind::OutsidePhase;
    err << json{{"error", to_string(e.kind())}, {"message", e.what()}}.dump() << '\n';
    return config ? 2 : 1;
  }

  if (common.out_path.empty()) {
    emit(tab, meta, common.format, out);
  } else {
    std::ofstream f(common.out_path, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + common.out_path);
    emit(tab, meta, common.format, f);
  }
  return tab.failed ? 1 : 0;
}

}  // namespace

std::vector<double> parse_grid(const std::string& spec) {
  auto to_d = [](const std::string& s) {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("bad number '" + s + "'");
    return v;
  };
  std::vector<double> out;
  if (spec.empty()) return out;
  if (spec.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
    if (parts.size() != 3) throw std::invalid_argument("grid must be start:stop:step");
    const double a = to_d(parts[0]), b = to_d(parts[1]), h = to_d(parts[2]);
    if (!(h > 0)) throw std::invalid_argument("grid step must be positive");
    if (b < a) return out;
    const auto n = static_cast<long>(std::floor((b - a) / h + 1e-9));
    for (long i = 0; i <= n; ++i) out.push_back(a + i * h);
    return out;
  }
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(to_d(item));
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err, false);
  } catch (const ConfigError& e) {
    err << json{{"error", "ConfigError"}, {"message", e.what()}}.dump() << '\n';
    return 2;
  } catch (const Error& e) {
    err << json{{"error", to_string(e.kind())}, {"message", e.what()}}.dump() << '\n';
    return 1;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace gdyne::cli
