// Command-line front end: scenario-driven solves, penalty tuning, radius
// tables, Monte-Carlo simulation, reliability sweeps, and the grid demo.
// Every run writes a manifest sufficient to reproduce its outputs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wlqc/finite_horizon.hpp"
#include "wlqc/infinite_horizon.hpp"
#include "wlqc/model.hpp"
#include "wlqc/numeric.hpp"
#include "wlqc/powergrid.hpp"
#include "wlqc/rng.hpp"
#include "wlqc/robustness.hpp"
#include "wlqc/scenario.hpp"
#include "wlqc/serialize.hpp"
#include "wlqc/simulator.hpp"
#include "wlqc/tuning.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wlqc;

namespace {

constexpr const char* kVersion = "0.1.0";

struct CommonArgs {
  std::string scenario_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> lambda;
  std::optional<double> theta;
  std::optional<double> beta;
  std::optional<int> horizon;
  int runs = 1000;
};

std::string hex64(std::uint64_t value) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(value));
  return buf;
}

void write_manifest(const CommonArgs& args, const std::string& command,
                    const scenario::Scenario* sc,
                    const std::vector<std::pair<std::string, std::string>>&
                        resolved) {
  std::ostringstream os;
  os << "wlqc-manifest v1\n";
  os << "version " << kVersion << "\n";
  os << "command " << command << "\n";
  os << "scenario " << (sc ? hex64(sc->source_hash) : std::string("none"))
     << "\n";
  os << "seed " << (sc ? sc->seed : args.seed.value_or(0)) << "\n";
  for (const auto& [key, value] : resolved) os << key << " " << value << "\n";
  io::write_text_file((fs::path(args.out_dir) / "manifest.txt").string(),
                      os.str());
}

scenario::Scenario load(const CommonArgs& args) {
  if (args.scenario_path.empty())
    throw SolverError(ErrorCode::BadScenario, "--scenario is required");
  scenario::Scenario sc =
      scenario::load_scenario(args.scenario_path, args.seed);
  if (args.horizon) {
    sc.horizon = *args.horizon;
    if (sc.mode == scenario::Scenario::Mode::Finite)
      sc.cost.horizon = *args.horizon;
  }
  if (args.theta) sc.theta = *args.theta;
  if (args.beta) sc.beta = *args.beta;
  return sc;
}

// Penalty resolution: explicit --lambda wins, then the scenario's fixed
// value; tune-mode scenarios run the optimizer first.
double resolve_lambda(const scenario::Scenario& sc,
                      const std::optional<double>& flag,
                      tuning::TunedPenalty* tuned_out = nullptr) {
  if (flag) return *flag;
  if (!sc.tune) return sc.lambda;
  tuning::TunedPenalty tuned;
  if (sc.mode == scenario::Scenario::Mode::Finite) {
    tuned = tuning::optimize_lambda_finite(sc.sys, sc.cost, sc.emp, sc.horizon,
                                           sc.x0, sc.theta, 1e-3);
  } else {
    tuned = tuning::optimize_lambda_infinite(sc.sys, sc.cost, sc.emp, sc.theta,
                                             1e-3);
  }
  if (tuned.monotone_tail)
    std::cerr << "warning: MonotoneTail: the tuning objective kept "
                 "decreasing up to the search cap\n";
  if (tuned_out) *tuned_out = tuned;
  return tuned.lambda_star;
}

std::vector<std::string> policy_header(int n, int m) {
  std::vector<std::string> header{"t"};
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      header.push_back("K_" + std::to_string(i) + "_" + std::to_string(j));
  for (int i = 0; i < m; ++i) header.push_back("L_" + std::to_string(i));
  return header;
}

std::vector<std::string> policy_row(int t, const AffinePolicy& p) {
  std::vector<std::string> row{std::to_string(t)};
  for (Eigen::Index i = 0; i < p.K.rows(); ++i)
    for (Eigen::Index j = 0; j < p.K.cols(); ++j)
      row.push_back(io::fmt17(p.K(i, j)));
  for (Eigen::Index i = 0; i < p.L.size(); ++i)
    row.push_back(io::fmt17(p.L(i)));
  return row;
}

int run_solve_finite(const CommonArgs& args) {
  scenario::Scenario sc = load(args);
  if (sc.mode != scenario::Scenario::Mode::Finite)
    throw SolverError(ErrorCode::BadScenario,
                      "solve-finite needs a finite-mode scenario");
  fs::create_directories(args.out_dir);
  const double lambda = resolve_lambda(sc, args.lambda);
  const finite_horizon::FiniteSolution sol =
      finite_horizon::solve_finite(sc.sys, sc.cost, {sc.emp}, lambda);

  io::write_text_file(
      (fs::path(args.out_dir) / "solution.txt").string(),
      io::dump_finite(sol, sc.sys.n(), sc.sys.m(), sc.sys.k()));

  io::CsvWriter policies(policy_header(sc.sys.n(), sc.sys.m()));
  for (int t = 0; t < sol.horizon(); ++t)
    policies.add_row(policy_row(t, sol.policies[static_cast<size_t>(t)]));
  io::write_text_file((fs::path(args.out_dir) / "policy.csv").string(),
                      policies.str());

  std::ostringstream cert;
  cert << "lambda " << io::fmt17(lambda) << "\n";
  cert << "assumption_margin " << io::fmt17(sol.assumption_margin) << "\n";
  cert << "V0_at_x0 " << io::fmt17(sol.value_at(sc.x0)) << "\n";
  io::write_text_file((fs::path(args.out_dir) / "certificate.txt").string(),
                      cert.str());

  write_manifest(args, "solve-finite", &sc,
                 {{"lambda", io::fmt17(lambda)},
                  {"horizon", std::to_string(sc.horizon)}});
  return 0;
}

int run_solve_infinite(const CommonArgs& args) {
  scenario::Scenario sc = load(args);
  fs::create_directories(args.out_dir);
  const double lambda = resolve_lambda(sc, args.lambda);
  const auto cert = infinite_horizon::check_assumptions(sc.sys, sc.cost, lambda);
  const infinite_horizon::SteadySolution sol =
      infinite_horizon::solve_are(sc.sys, sc.cost, sc.emp, lambda);

  io::write_text_file(
      (fs::path(args.out_dir) / "solution.txt").string(),
      io::dump_steady(sol, sc.sys.n(), sc.sys.m(), sc.sys.k()));

  // Bellman-equation probe at seeded random states.
  std::vector<Eigen::VectorXd> xs;
  Philox4x32 rng(sc.seed, /*stream=*/7);
  for (int i = 0; i < 10; ++i) xs.push_back(rng.normal_vector(sc.sys.n()));
  const double residual = infinite_horizon::bellman_residual(
      sol, sc.sys, sc.cost, sc.emp, lambda, xs);

  std::ostringstream os;
  os << "lambda " << io::fmt17(lambda) << "\n";
  os << "phi_min_eig " << io::fmt17(cert.phi_min_eig) << "\n";
  os << "stabilizable " << (cert.stabilizable ? "yes" : "no") << "\n";
  os << "observable " << (cert.observable ? "yes" : "no") << "\n";
  os << "penalty_margin " << io::fmt17(sol.penalty_margin) << "\n";
  os << "are_residual " << io::fmt17(sol.are_residual) << "\n";
  os << "closed_loop_spectral_radius "
     << io::fmt17(sol.closed_loop_spectral_radius) << "\n";
  os << "mean_state_gain_radius " << io::fmt17(sol.mean_state_gain_radius)
     << "\n";
  os << "bellman_residual_10_states " << io::fmt17(residual) << "\n";
  os << "rho " << io::fmt17(sol.rho) << "\n";
  io::write_text_file((fs::path(args.out_dir) / "certificate.txt").string(),
                      os.str());

  write_manifest(args, "solve-infinite", &sc, {{"lambda", io::fmt17(lambda)}});
  return 0;
}

int run_tune(const CommonArgs& args) {
  scenario::Scenario sc = load(args);
  fs::create_directories(args.out_dir);
  const double theta = args.theta.value_or(sc.tune ? sc.theta : 0.0);

  tuning::TunedPenalty tuned;
  json extras;
  if (sc.mode == scenario::Scenario::Mode::Finite) {
    const double lambda_hat = tuning::find_lambda_hat_finite(
        sc.sys, sc.cost, sc.emp, sc.horizon, 1e-3);
    tuned = tuning::optimize_lambda_finite(sc.sys, sc.cost, sc.emp, sc.horizon,
                                           sc.x0, theta, 1e-3);
    extras["lambda_hat"] = lambda_hat;
  } else {
    const tuning::LambdaProfile profile =
        tuning::find_lambda_profile_infinite(sc.sys, sc.cost, sc.emp, 1e-3);
    tuned = tuning::optimize_lambda_infinite(sc.sys, sc.cost, sc.emp, theta,
                                             1e-3);
    extras["lambda_hat1"] = profile.lambda_hat1;
    extras["lambda_hat2"] = profile.lambda_hat2;
    extras["lambda_hat_inf"] = profile.lambda_hat_inf;
  }
  if (tuned.monotone_tail)
    std::cerr << "warning: MonotoneTail: objective nonincreasing up to the "
                 "lambda cap; lambda_star pinned at the cap\n";

  io::CsvWriter evals({"lambda", "objective", "margin"});
  for (const auto& [lambda, objective] : tuned.evaluations) {
    double margin = std::numeric_limits<double>::quiet_NaN();
    try {
      if (sc.mode == scenario::Scenario::Mode::Finite) {
        margin = finite_horizon::solve_finite(sc.sys, sc.cost, {sc.emp}, lambda)
                     .assumption_margin;
      } else {
        margin = infinite_horizon::solve_are_fixed_point(sc.sys, sc.cost,
                                                         sc.emp, lambda)
                     .penalty_margin;
      }
    } catch (const SolverError&) {
      // NaN margin marks an infeasible probe.
    }
    evals.add_row({io::fmt17(lambda), io::fmt17(objective), io::fmt17(margin)});
  }
  io::write_text_file((fs::path(args.out_dir) / "evaluations.csv").string(),
                      evals.str());

  json summary;
  summary["command"] = "tune";
  summary["scenario_hash"] = hex64(sc.source_hash);
  summary["seed"] = sc.seed;
  summary["theta"] = theta;
  summary["beta"] = sc.beta;
  summary["lambda_star"] = tuned.lambda_star;
  summary["upper_bound"] = tuned.upper_bound;
  summary["monotone_tail"] = tuned.monotone_tail;
  summary["thresholds"] = extras;
  io::write_text_file((fs::path(args.out_dir) / "summary.json").string(),
                      summary.dump(2) + "\n");

  write_manifest(args, "tune", &sc, {{"theta", io::fmt17(theta)}});
  return 0;
}

int run_radius(const CommonArgs& args, int dim, double q, double c1, double c2,
               double zeta, bool compact, const std::string& n_grid) {
  fs::create_directories(args.out_dir);
  robustness::RadiusParams params;
  params.beta = args.beta.value_or(0.05);
  params.T = args.horizon.value_or(1);
  params.k = dim;
  params.q = q;
  params.c1 = c1;
  params.c2 = c2;
  params.zeta = zeta;

  std::vector<int> ns;
  std::istringstream grid(n_grid);
  std::string tok;
  while (std::getline(grid, tok, ',')) ns.push_back(std::stoi(tok));
  const auto table = robustness::radius_sensitivity(params, ns, compact);

  io::CsvWriter csv({"N", "T", "beta", "theta"});
  for (const auto& [n, theta] : table)
    csv.add_row({std::to_string(n), std::to_string(params.T),
                 io::fmt17(params.beta), io::fmt17(theta)});
  io::write_text_file((fs::path(args.out_dir) / "radius.csv").string(),
                      csv.str());
  write_manifest(args, "radius", nullptr,
                 {{"dim", std::to_string(dim)},
                  {"beta", io::fmt17(params.beta)},
                  {"T", std::to_string(params.T)},
                  {"compact", compact ? "1" : "0"}});
  return 0;
}

sim::DisturbancePolicy make_disturbance(
    const std::string& mode, const scenario::Scenario& sc,
    const finite_horizon::FiniteSolution* finite_sol,
    const infinite_horizon::SteadySolution* steady_sol) {
  if (mode == "empirical") return sim::DisturbancePolicy::empirical(sc.emp);
  if (mode == "sampler") {
    if (!sc.sample_spec)
      throw SolverError(ErrorCode::BadScenario,
                        "sampler mode needs gaussian samples in the scenario");
    return sim::DisturbancePolicy::sampler(*sc.sample_spec);
  }
  if (mode == "worst-case") {
    if (finite_sol)
      return sim::DisturbancePolicy::worst_case_finite(*finite_sol, sc.sys,
                                                       sc.emp);
    return sim::DisturbancePolicy::worst_case_steady(*steady_sol, sc.sys,
                                                     sc.emp);
  }
  if (mode == "hinf") {
    if (!steady_sol)
      throw SolverError(ErrorCode::BadScenario,
                        "hinf disturbance needs an infinite-mode scenario");
    return sim::DisturbancePolicy::hinf_pointwise(*steady_sol, sc.sys);
  }
  throw SolverError(ErrorCode::BadScenario,
                    "unknown disturbance mode '" + mode + "'");
}

void write_bands(const std::string& path,
                 const std::vector<std::vector<double>>& per_run_component,
                 double dt) {
  io::CsvWriter csv({"t", "time_s", "mean", "p05", "p25", "p50", "p75", "p95"});
  if (per_run_component.empty()) {
    io::write_text_file(path, csv.str());
    return;
  }
  const size_t steps = per_run_component.front().size();
  const size_t runs = per_run_component.size();
  std::vector<double> column(runs);
  for (size_t t = 0; t < steps; ++t) {
    for (size_t r = 0; r < runs; ++r) column[r] = per_run_component[r][t];
    std::sort(column.begin(), column.end());
    auto pct = [&](double p) {
      const double idx = p * (runs - 1);
      const size_t lo = static_cast<size_t>(idx);
      const size_t hi = std::min(runs - 1, lo + 1);
      const double frac = idx - lo;
      return column[lo] * (1.0 - frac) + column[hi] * frac;
    };
    double mean = 0.0;
    for (double v : column) mean += v;
    mean /= runs;
    csv.add_row({std::to_string(t), io::fmt17(t * dt), io::fmt17(mean),
                 io::fmt17(pct(0.05)), io::fmt17(pct(0.25)),
                 io::fmt17(pct(0.50)), io::fmt17(pct(0.75)),
                 io::fmt17(pct(0.95))});
  }
  io::write_text_file(path, csv.str());
}

int run_simulate(const CommonArgs& args, const std::string& dist_mode,
                 int component) {
  scenario::Scenario sc = load(args);
  fs::create_directories(args.out_dir);

  std::optional<finite_horizon::FiniteSolution> finite_sol;
  std::optional<infinite_horizon::SteadySolution> steady_sol;
  sim::ControlPolicy policy = sim::ControlPolicy::stationary(AffinePolicy{});
  double lambda = 0.0;
  int horizon = 0;
  if (sc.mode == scenario::Scenario::Mode::Finite) {
    lambda = resolve_lambda(sc, args.lambda);
    finite_sol = finite_horizon::solve_finite(sc.sys, sc.cost, {sc.emp}, lambda);
    policy = sim::ControlPolicy::per_stage(finite_sol->policies);
    horizon = sc.horizon;
  } else {
    lambda = resolve_lambda(sc, args.lambda);
    steady_sol = infinite_horizon::solve_are(sc.sys, sc.cost, sc.emp, lambda);
    policy = sim::ControlPolicy::stationary(
        AffinePolicy{steady_sol->K, steady_sol->L});
    horizon = args.horizon.value_or(500);
  }
  CostSpec rollout_cost = sc.cost;
  rollout_cost.horizon = horizon;

  const sim::DisturbancePolicy dist = make_disturbance(
      dist_mode, sc, finite_sol ? &*finite_sol : nullptr,
      steady_sol ? &*steady_sol : nullptr);

  const int runs = std::max(1, args.runs);
  if (component < 0 || component >= sc.sys.n()) component = sc.sys.n() - 1;

  std::vector<std::vector<double>> component_traces;
  component_traces.reserve(static_cast<size_t>(runs));
  std::vector<double> costs(static_cast<size_t>(runs));
  std::vector<Eigen::VectorXd> mean_states(
      static_cast<size_t>(horizon) + 1, Eigen::VectorXd::Zero(sc.sys.n()));
  for (int run = 0; run < runs; ++run) {
    sim::RolloutResult r;
    try {
      r = sim::rollout(sc.sys, policy, dist, sc.x0, horizon, rollout_cost,
                       sc.seed, lambda, static_cast<std::uint64_t>(run));
    } catch (const SolverError& err) {
      if (err.code() == ErrorCode::NonFiniteState)
        throw SolverError(err.code(),
                          std::string(err.what()) + " (run " +
                              std::to_string(run) + ")",
                          err.stage());
      throw;
    }
    costs[static_cast<size_t>(run)] = r.total_cost / horizon;
    std::vector<double> trace(r.states.size());
    for (size_t t = 0; t < r.states.size(); ++t) {
      trace[t] = r.states[t](component);
      mean_states[t] += r.states[t];
    }
    component_traces.push_back(std::move(trace));
  }
  for (auto& v : mean_states) v /= runs;

  double mean = numeric::pairwise_sum(costs) / runs;
  double std_error = 0.0;
  if (runs > 1) {
    std::vector<double> sq(costs.size());
    for (size_t i = 0; i < costs.size(); ++i)
      sq[i] = (costs[i] - mean) * (costs[i] - mean);
    std_error = std::sqrt(numeric::pairwise_sum(sq) / (runs - 1) / runs);
  }

  io::CsvWriter estimates({"mean", "std_error", "n_runs", "seed", "lambda",
                           "dist"});
  estimates.add_row({io::fmt17(mean), io::fmt17(std_error),
                     std::to_string(runs), std::to_string(sc.seed),
                     io::fmt17(lambda), dist_mode});
  io::write_text_file((fs::path(args.out_dir) / "estimates.csv").string(),
                      estimates.str());

  const double dt = sc.grid ? sc.grid->dt : 1.0;
  write_bands((fs::path(args.out_dir) / "bands.csv").string(),
              component_traces, dt);

  if (sc.grid) {
    const int g = sc.grid->n_gen();
    io::CsvWriter settling({"generator", "settling_time_s"});
    for (int i = 0; i < g; ++i) {
      const auto s =
          sim::settling_time(mean_states, {g + i}, 0.03, sc.grid->dt);
      settling.add_row({std::to_string(i + 1),
                        s ? io::fmt17(*s) : std::string("never")});
    }
    io::write_text_file((fs::path(args.out_dir) / "settling.csv").string(),
                        settling.str());
  }

  json summary;
  summary["command"] = "simulate";
  summary["scenario_hash"] = hex64(sc.source_hash);
  summary["seed"] = sc.seed;
  summary["dist"] = dist_mode;
  summary["lambda"] = lambda;
  summary["estimates"] = {{"mean", mean},
                          {"std_error", std_error},
                          {"n_runs", runs}};
  io::write_text_file((fs::path(args.out_dir) / "summary.json").string(),
                      summary.dump(2) + "\n");

  write_manifest(args, "simulate", &sc,
                 {{"dist", dist_mode},
                  {"runs", std::to_string(runs)},
                  {"lambda", io::fmt17(lambda)},
                  {"component", std::to_string(component)}});
  return 0;
}

int run_reliability(const CommonArgs& args, const std::string& theta_grid,
                    int trials) {
  scenario::Scenario sc = load(args);
  if (sc.mode != scenario::Scenario::Mode::Finite)
    throw SolverError(ErrorCode::BadScenario,
                      "reliability runs in finite mode");
  if (!sc.sample_spec)
    throw SolverError(ErrorCode::BadScenario,
                      "reliability needs gaussian samples (the true "
                      "distribution) in the scenario");
  fs::create_directories(args.out_dir);

  std::vector<double> thetas;
  std::istringstream grid(theta_grid);
  std::string tok;
  while (std::getline(grid, tok, ',')) thetas.push_back(std::stod(tok));

  io::CsvWriter csv({"theta", "reliability", "trials", "runs_per_trial"});
  json points = json::array();
  for (double theta : thetas) {
    const double reliability = sim::estimate_reliability(
        sc.sys, sc.cost, *sc.sample_spec, sc.emp.count(), theta, sc.beta,
        sc.horizon, sc.x0, trials, sc.seed, args.runs);
    csv.add_row({io::fmt17(theta), io::fmt17(reliability),
                 std::to_string(trials), std::to_string(args.runs)});
    points.push_back({{"theta", theta}, {"reliability", reliability}});
  }
  io::write_text_file((fs::path(args.out_dir) / "reliability.csv").string(),
                      csv.str());

  json summary;
  summary["command"] = "reliability";
  summary["scenario_hash"] = hex64(sc.source_hash);
  summary["seed"] = sc.seed;
  summary["beta"] = sc.beta;
  summary["points"] = points;
  io::write_text_file((fs::path(args.out_dir) / "summary.json").string(),
                      summary.dump(2) + "\n");
  write_manifest(args, "reliability", &sc,
                 {{"trials", std::to_string(trials)},
                  {"runs", std::to_string(args.runs)},
                  {"theta_grid", theta_grid}});
  return 0;
}

int run_grid_demo(const CommonArgs& args, const std::string& grid_path) {
  fs::create_directories(args.out_dir);
  const powergrid::GridModel grid = grid_path.empty()
                                        ? powergrid::synthetic10()
                                        : powergrid::load_grid_file(grid_path);
  const double theta = args.theta.value_or(0.5);
  const std::uint64_t seed = args.seed.value_or(7ull);
  const powergrid::DemoScenario demo =
      powergrid::demo_scenario(grid, theta, 10, seed);
  const int horizon = demo.cost.horizon;
  const int runs = std::max(1, args.runs);
  const int g = grid.n_gen();

  const tuning::TunedPenalty tuned = tuning::optimize_lambda_finite(
      demo.sys, demo.cost, demo.emp, horizon, demo.x0, theta, 1e-3);
  const finite_horizon::FiniteSolution minimax = finite_horizon::solve_finite(
      demo.sys, demo.cost, {demo.emp}, tuned.lambda_star);
  const finite_horizon::FiniteSolution lqg =
      finite_horizon::solve_finite_lqg(demo.sys, demo.cost, {demo.emp});

  // Both controllers face the worst-case distribution of the minimax
  // solution; common run streams pair the atom draws.
  const sim::DisturbancePolicy wc =
      sim::DisturbancePolicy::worst_case_finite(minimax, demo.sys, demo.emp);

  struct Outcome {
    std::vector<Eigen::VectorXd> mean_states;
    std::vector<std::vector<double>> traces;  // last generator frequency
    double energy = 0.0;
  };
  auto simulate = [&](const finite_horizon::FiniteSolution& sol) {
    Outcome out;
    out.mean_states.assign(static_cast<size_t>(horizon) + 1,
                           Eigen::VectorXd::Zero(demo.sys.n()));
    const sim::ControlPolicy policy =
        sim::ControlPolicy::per_stage(sol.policies);
    for (int run = 0; run < runs; ++run) {
      const sim::RolloutResult r =
          sim::rollout(demo.sys, policy, wc, demo.x0, horizon, demo.cost,
                       seed, tuned.lambda_star,
                       static_cast<std::uint64_t>(run));
      std::vector<double> trace(r.states.size());
      for (size_t t = 0; t < r.states.size(); ++t) {
        out.mean_states[t] += r.states[t];
        trace[t] = r.states[t](2 * g - 1);
      }
      out.traces.push_back(std::move(trace));
      out.energy += sim::control_energy(r.inputs, std::min(horizon, 50));
    }
    for (auto& v : out.mean_states) v /= runs;
    out.energy /= runs;
    return out;
  };

  const Outcome minimax_out = simulate(minimax);
  const Outcome lqg_out = simulate(lqg);

  io::CsvWriter settling({"generator", "lqg_s", "minimax_s"});
  double lqg_avg = 0.0, minimax_avg = 0.0;
  const double horizon_s = horizon * grid.dt;
  for (int i = 0; i < g; ++i) {
    const auto s_lqg =
        sim::settling_time(lqg_out.mean_states, {g + i}, 0.03, grid.dt);
    const auto s_mm =
        sim::settling_time(minimax_out.mean_states, {g + i}, 0.03, grid.dt);
    lqg_avg += s_lqg.value_or(horizon_s);
    minimax_avg += s_mm.value_or(horizon_s);
    settling.add_row({std::to_string(i + 1),
                      s_lqg ? io::fmt17(*s_lqg) : std::string("never"),
                      s_mm ? io::fmt17(*s_mm) : std::string("never")});
  }
  lqg_avg /= g;
  minimax_avg /= g;
  io::write_text_file((fs::path(args.out_dir) / "settling.csv").string(),
                      settling.str());

  io::CsvWriter energy({"controller", "mean_energy_first_5s"});
  energy.add_row({"lqg", io::fmt17(lqg_out.energy)});
  energy.add_row({"minimax", io::fmt17(minimax_out.energy)});
  io::write_text_file((fs::path(args.out_dir) / "energy.csv").string(),
                      energy.str());

  write_bands((fs::path(args.out_dir) / "bands_minimax.csv").string(),
              minimax_out.traces, grid.dt);
  write_bands((fs::path(args.out_dir) / "bands_lqg.csv").string(),
              lqg_out.traces, grid.dt);

  json summary;
  summary["command"] = "grid-demo";
  summary["seed"] = seed;
  summary["theta"] = theta;
  summary["runs"] = runs;
  summary["lambda_star"] = tuned.lambda_star;
  summary["upper_bound"] = tuned.upper_bound;
  summary["avg_settling_s"] = {{"lqg", lqg_avg}, {"minimax", minimax_avg}};
  summary["mean_energy"] = {{"lqg", lqg_out.energy},
                            {"minimax", minimax_out.energy}};
  io::write_text_file((fs::path(args.out_dir) / "summary.json").string(),
                      summary.dump(2) + "\n");

  write_manifest(args, "grid-demo", nullptr,
                 {{"theta", io::fmt17(theta)},
                  {"seed", std::to_string(seed)},
                  {"runs", std::to_string(runs)},
                  {"grid", grid_path.empty() ? "synthetic10" : grid_path}});

  std::cout << "avg settling (s): lqg " << lqg_avg << ", minimax "
            << minimax_avg << "\n";
  return 0;
}

int exit_code_for(const SolverError& err) {
  switch (err.code()) {
    case ErrorCode::PenaltyTooSmall:
    case ErrorCode::AssumptionViolated:
      return 2;
    case ErrorCode::BadScenario:
    case ErrorCode::BadDataFile:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::InvalidRisk:
      return 64;
    default:
      return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimax linear-quadratic control with a Wasserstein penalty"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string dist_mode = "worst-case";
  std::string grid_path;
  std::string theta_grid = "0.001,0.003,0.01,0.03,0.1,0.3,1.0";
  std::string n_grid = "1,2,5,10,20,50,100,200,500,1000";
  int trials = 200;
  int component = -1;
  int dim = 1;
  double q = 4.0, c1 = 1.0, c2 = 1.0, zeta = 1.0;
  bool compact = false;

  auto add_common = [&](CLI::App* cmd, bool needs_scenario) {
    if (needs_scenario)
      cmd->add_option("--scenario", args.scenario_path, "scenario file");
    cmd->add_option("--out", args.out_dir, "output directory")->required();
    cmd->add_option("--seed", args.seed, "seed override");
    cmd->add_option("--runs", args.runs, "Monte-Carlo runs");
    cmd->add_option("--theta", args.theta, "ambiguity radius");
    cmd->add_option("--beta", args.beta, "risk level");
    cmd->add_option("--lambda", args.lambda, "penalty parameter");
    cmd->add_option("--horizon", args.horizon, "horizon override");
  };

  CLI::App* solve_finite = app.add_subcommand(
      "solve-finite", "finite-horizon backward pass and policy synthesis");
  add_common(solve_finite, true);

  CLI::App* solve_infinite = app.add_subcommand(
      "solve-infinite", "steady-state solve with dual-method cross-check");
  add_common(solve_infinite, true);

  CLI::App* tune = app.add_subcommand(
      "tune", "critical thresholds and penalty optimization");
  add_common(tune, true);

  CLI::App* radius =
      app.add_subcommand("radius", "out-of-sample radius tables");
  add_common(radius, false);
  radius->add_option("--dim", dim, "disturbance dimension k");
  radius->add_option("--q", q, "light-tail exponent");
  radius->add_option("--c1", c1, "concentration constant c1");
  radius->add_option("--c2", c2, "concentration constant c2");
  radius->add_option("--zeta", zeta, "support half-diameter");
  radius->add_flag("--compact", compact, "compact-support variant");
  radius->add_option("--n-grid", n_grid, "comma-separated sample counts");

  CLI::App* simulate =
      app.add_subcommand("simulate", "closed-loop Monte-Carlo estimates");
  add_common(simulate, true);
  simulate->add_option("--dist", dist_mode,
                       "worst-case | empirical | sampler | hinf");
  simulate->add_option("--component", component,
                       "state component for the percentile bands");

  CLI::App* reliability = app.add_subcommand(
      "reliability", "out-of-sample reliability sweep over theta");
  add_common(reliability, true);
  reliability->add_option("--theta-grid", theta_grid,
                          "comma-separated theta values");
  reliability->add_option("--trials", trials, "trials per theta");

  CLI::App* grid_demo = app.add_subcommand(
      "grid-demo", "frequency-regulation demo (LQG vs minimax)");
  add_common(grid_demo, false);
  grid_demo->add_option("--grid", grid_path,
                        "grid data file (default: bundled synthetic network)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 64;
  }

  try {
    if (solve_finite->parsed()) return run_solve_finite(args);
    if (solve_infinite->parsed()) return run_solve_infinite(args);
    if (tune->parsed()) return run_tune(args);
    if (radius->parsed())
      return run_radius(args, dim, q, c1, c2, zeta, compact, n_grid);
    if (simulate->parsed()) return run_simulate(args, dist_mode, component);
    if (reliability->parsed())
      return run_reliability(args, theta_grid, trials);
    if (grid_demo->parsed()) return run_grid_demo(args, grid_path);
  } catch (const SolverError& err) {
    std::cerr << "error: " << error_code_name(err.code()) << ": " << err.what()
              << "\n";
    return exit_code_for(err);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 3;
  }
  return 64;
}
