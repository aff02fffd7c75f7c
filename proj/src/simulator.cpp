#include "wlqc/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "wlqc/numeric.hpp"
#include "wlqc/tuning.hpp"

namespace wlqc::sim {

namespace {

constexpr double kDivergenceBound = 1e12;

Eigen::LDLT<Eigen::MatrixXd> penalty_operator(const LinearSystem& sys,
                                              const Eigen::MatrixXd& P,
                                              double lambda) {
  const Eigen::MatrixXd d =
      lambda * Eigen::MatrixXd::Identity(sys.k(), sys.k()) -
      numeric::symmetrize(sys.Xi.transpose() * P * sys.Xi);
  if (numeric::min_eigenvalue(d) <= numeric::kPdTol * (1.0 + lambda))
    throw SolverError(ErrorCode::PenaltyTooSmall,
                      "penalty margin is not positive");
  return Eigen::LDLT<Eigen::MatrixXd>(d);
}

}  // namespace

ControlPolicy ControlPolicy::stationary(AffinePolicy policy) {
  ControlPolicy p;
  p.policies_.push_back(std::move(policy));
  p.stationary_ = true;
  return p;
}

ControlPolicy ControlPolicy::per_stage(std::vector<AffinePolicy> policies) {
  if (policies.empty())
    throw SolverError(ErrorCode::DimensionMismatch,
                      "per-stage policy list is empty");
  ControlPolicy p;
  p.policies_ = std::move(policies);
  p.stationary_ = false;
  return p;
}

const AffinePolicy& ControlPolicy::at(int t) const {
  if (stationary_) return policies_.front();
  if (t < 0 || t >= static_cast<int>(policies_.size()))
    throw SolverError(ErrorCode::DimensionMismatch,
                      "stage outside the policy horizon");
  return policies_[static_cast<size_t>(t)];
}

DisturbancePolicy DisturbancePolicy::sampler(GaussianSpec spec) {
  DisturbancePolicy d;
  d.kind_ = Kind::Sampler;
  d.dim_ = static_cast<int>(spec.mean.size());
  d.gaussian_ = std::move(spec);
  return d;
}

DisturbancePolicy DisturbancePolicy::empirical(
    const EmpiricalDistribution& emp) {
  DisturbancePolicy d;
  d.kind_ = Kind::Empirical;
  d.dim_ = emp.dim();
  d.atoms_ = emp.support;
  return d;
}

DisturbancePolicy DisturbancePolicy::worst_case_finite(
    const finite_horizon::FiniteSolution& sol, const LinearSystem& sys,
    const EmpiricalDistribution& emp) {
  DisturbancePolicy d;
  d.kind_ = Kind::WorstCaseFinite;
  d.dim_ = sys.k();
  d.matched_support_ = emp.support;
  const int horizon = sol.horizon();
  d.gains_.reserve(static_cast<size_t>(horizon));
  d.offsets_.reserve(static_cast<size_t>(horizon));
  for (int t = 0; t < horizon; ++t) {
    const auto& next = sol.values[static_cast<size_t>(t) + 1];
    const auto& policy = sol.policies[static_cast<size_t>(t)];
    const auto d_ldlt = penalty_operator(sys, next.P, sol.lambda);
    d.gains_.push_back(d_ldlt.solve(sys.Xi.transpose() * next.P *
                                    (sys.A + sys.B * policy.K)));
    Eigen::MatrixXd offsets(sys.k(), emp.count());
    const Eigen::VectorXd base =
        sys.Xi.transpose() * (next.P * (sys.B * policy.L) + next.r);
    for (int i = 0; i < emp.count(); ++i)
      offsets.col(i) =
          d_ldlt.solve(base + sol.lambda * emp.support.col(i));
    d.offsets_.push_back(std::move(offsets));
  }
  return d;
}

DisturbancePolicy DisturbancePolicy::worst_case_steady(
    const infinite_horizon::SteadySolution& sol, const LinearSystem& sys,
    const EmpiricalDistribution& emp) {
  DisturbancePolicy d;
  d.kind_ = Kind::WorstCaseSteady;
  d.dim_ = sys.k();
  d.matched_support_ = emp.support;
  const auto d_ldlt = penalty_operator(sys, sol.P, sol.lambda);
  d.gains_.push_back(
      d_ldlt.solve(sys.Xi.transpose() * sol.P * (sys.A + sys.B * sol.K)));
  Eigen::MatrixXd offsets(sys.k(), emp.count());
  const Eigen::VectorXd base =
      sys.Xi.transpose() * (sol.P * (sys.B * sol.L) + sol.r);
  for (int i = 0; i < emp.count(); ++i)
    offsets.col(i) = d_ldlt.solve(base + sol.lambda * emp.support.col(i));
  d.offsets_.push_back(std::move(offsets));
  return d;
}

DisturbancePolicy DisturbancePolicy::hinf_pointwise(
    const infinite_horizon::SteadySolution& sol, const LinearSystem& sys) {
  DisturbancePolicy d;
  d.kind_ = Kind::HinfPointwise;
  d.dim_ = sys.k();
  const auto d_ldlt = penalty_operator(sys, sol.P, sol.lambda);
  d.gains_.push_back(
      d_ldlt.solve(sys.Xi.transpose() * sol.P * (sys.A + sys.B * sol.K)));
  return d;
}

DisturbancePolicy DisturbancePolicy::fixed_sequence(
    std::vector<Eigen::VectorXd> ws) {
  if (ws.empty())
    throw SolverError(ErrorCode::DimensionMismatch,
                      "fixed disturbance sequence is empty");
  DisturbancePolicy d;
  d.kind_ = Kind::FixedSequence;
  d.dim_ = static_cast<int>(ws.front().size());
  d.atoms_.resize(d.dim_, static_cast<Eigen::Index>(ws.size()));
  for (size_t i = 0; i < ws.size(); ++i)
    d.atoms_.col(static_cast<Eigen::Index>(i)) = ws[i];
  return d;
}

DisturbancePolicy DisturbancePolicy::with_support_shift(
    const Eigen::VectorXd& shift) const {
  if (kind_ != Kind::WorstCaseFinite && kind_ != Kind::WorstCaseSteady)
    throw SolverError(ErrorCode::DimensionMismatch,
                      "support shift applies to worst-case policies only");
  DisturbancePolicy d = *this;
  d.shift_ = shift;
  return d;
}

DisturbancePolicy DisturbancePolicy::interpolated_toward_matched(
    double alpha) const {
  if (kind_ != Kind::WorstCaseFinite && kind_ != Kind::WorstCaseSteady)
    throw SolverError(ErrorCode::DimensionMismatch,
                      "interpolation applies to worst-case policies only");
  if (alpha < 0.0 || alpha > 1.0)
    throw SolverError(ErrorCode::DimensionMismatch,
                      "alpha must lie in [0, 1]");
  DisturbancePolicy d = *this;
  for (auto& gain : d.gains_) gain *= alpha;
  for (auto& offsets : d.offsets_)
    for (Eigen::Index i = 0; i < offsets.cols(); ++i)
      offsets.col(i) = alpha * offsets.col(i) +
                       (1.0 - alpha) * matched_support_.col(i);
  return d;
}

const Eigen::MatrixXd& DisturbancePolicy::gain_at(int t) const {
  if (gains_.size() == 1) return gains_.front();
  if (t < 0 || t >= static_cast<int>(gains_.size()))
    throw SolverError(ErrorCode::DimensionMismatch,
                      "stage outside the disturbance-policy horizon");
  return gains_[static_cast<size_t>(t)];
}

const Eigen::MatrixXd& DisturbancePolicy::offsets_at(int t) const {
  if (offsets_.size() == 1) return offsets_.front();
  return offsets_[static_cast<size_t>(t)];
}

Eigen::VectorXd DisturbancePolicy::sample(int t, const Eigen::VectorXd& x,
                                          Philox4x32& rng) const {
  switch (kind_) {
    case Kind::Sampler:
      return gaussian_.mean + gaussian_.sigma * rng.normal_vector(dim_);
    case Kind::Empirical:
      return atoms_.col(static_cast<Eigen::Index>(
          rng.uniform_index(static_cast<std::uint64_t>(atoms_.cols()))));
    case Kind::WorstCaseFinite:
    case Kind::WorstCaseSteady: {
      const auto i = static_cast<Eigen::Index>(rng.uniform_index(
          static_cast<std::uint64_t>(offsets_at(t).cols())));
      Eigen::VectorXd w = gain_at(t) * x + offsets_at(t).col(i);
      if (shift_.size() > 0) w += shift_;
      return w;
    }
    case Kind::HinfPointwise:
      return gains_.front() * x;
    case Kind::FixedSequence:
      if (t < 0 || t >= atoms_.cols())
        throw SolverError(ErrorCode::DimensionMismatch,
                          "stage outside the fixed disturbance sequence");
      return atoms_.col(t);
  }
  throw SolverError(ErrorCode::DimensionMismatch, "unknown disturbance kind");
}

double DisturbancePolicy::stage_w2sq(int t, const Eigen::VectorXd& x) const {
  if (kind_ != Kind::WorstCaseFinite && kind_ != Kind::WorstCaseSteady)
    return 0.0;
  const Eigen::MatrixXd& offsets = offsets_at(t);
  const Eigen::VectorXd base = gain_at(t) * x;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < offsets.cols(); ++i) {
    Eigen::VectorXd w = base + offsets.col(i);
    if (shift_.size() > 0) w += shift_;
    acc += (w - matched_support_.col(i)).squaredNorm();
  }
  return acc / static_cast<double>(offsets.cols());
}

RolloutResult rollout(const LinearSystem& sys, const ControlPolicy& policy,
                      const DisturbancePolicy& dist, const Eigen::VectorXd& x0,
                      int T, const CostSpec& cost, std::uint64_t seed,
                      double lambda, std::uint64_t stream) {
  if (x0.size() != sys.n())
    throw SolverError(ErrorCode::DimensionMismatch, "x0 dimension mismatch");
  if (dist.dim() != sys.k())
    throw SolverError(ErrorCode::DimensionMismatch,
                      "disturbance dimension mismatch");

  Philox4x32 rng(seed, stream);
  RolloutResult out;
  out.states.reserve(static_cast<size_t>(T) + 1);
  out.inputs.reserve(static_cast<size_t>(T));
  out.disturbances.reserve(static_cast<size_t>(T));
  out.per_stage_costs.reserve(static_cast<size_t>(T));

  Eigen::VectorXd x = x0;
  out.states.push_back(x);
  double penalty_sum = 0.0;
  for (int t = 0; t < T; ++t) {
    const AffinePolicy& pi = policy.at(t);
    const Eigen::VectorXd u = pi.K * x + pi.L;
    const Eigen::VectorXd w = dist.sample(t, x, rng);
    penalty_sum += dist.stage_w2sq(t, x);
    out.per_stage_costs.push_back(stage_cost(x, u, cost));
    x = sys.A * x + sys.B * u + sys.Xi * w;
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > kDivergenceBound)
      throw SolverError(ErrorCode::NonFiniteState,
                        "state diverged at stage " + std::to_string(t), t);
    out.states.push_back(x);
    out.inputs.push_back(u);
    out.disturbances.push_back(w);
  }
  out.total_cost = numeric::pairwise_sum(out.per_stage_costs) +
                   terminal_cost(x, cost);
  out.penalized_cost = out.total_cost - lambda * penalty_sum;
  return out;
}

MonteCarloEstimate estimate_cost(const LinearSystem& sys,
                                 const ControlPolicy& policy,
                                 const DisturbancePolicy& dist,
                                 const Eigen::VectorXd& x0, int T,
                                 const CostSpec& cost, int n_runs,
                                 std::uint64_t seed, int n_threads) {
  if (n_runs < 1)
    throw SolverError(ErrorCode::DimensionMismatch, "n_runs must be positive");

  std::vector<double> values(static_cast<size_t>(n_runs));
  auto work = [&](int begin, int end) {
    for (int run = begin; run < end; ++run)
      values[static_cast<size_t>(run)] =
          rollout(sys, policy, dist, x0, T, cost, seed, 0.0,
                  static_cast<std::uint64_t>(run))
              .total_cost /
          T;
  };
  if (n_threads == 0)
    n_threads = std::max(1u, std::thread::hardware_concurrency());
  if (n_threads <= 1 || n_runs < 4 * n_threads) {
    work(0, n_runs);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (n_runs + n_threads - 1) / n_threads;
    for (int t = 0; t < n_threads; ++t) {
      const int begin = t * chunk;
      const int end = std::min(n_runs, begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  MonteCarloEstimate est;
  est.n_runs = n_runs;
  est.seed = seed;
  est.mean = numeric::pairwise_sum(values) / n_runs;
  if (n_runs > 1) {
    std::vector<double> sq(values.size());
    for (size_t i = 0; i < values.size(); ++i) {
      const double d = values[i] - est.mean;
      sq[i] = d * d;
    }
    const double var = numeric::pairwise_sum(sq) / (n_runs - 1);
    est.std_error = std::sqrt(var / n_runs);
  }
  return est;
}

std::vector<Eigen::VectorXd> mean_trajectory(
    const LinearSystem& sys, const ControlPolicy& policy,
    const DisturbancePolicy& dist, const Eigen::VectorXd& x0, int T,
    const CostSpec& cost, int n_runs, std::uint64_t seed) {
  std::vector<Eigen::VectorXd> acc(static_cast<size_t>(T) + 1,
                                   Eigen::VectorXd::Zero(sys.n()));
  for (int run = 0; run < n_runs; ++run) {
    const RolloutResult r =
        rollout(sys, policy, dist, x0, T, cost, seed, 0.0,
                static_cast<std::uint64_t>(run));
    for (size_t t = 0; t < acc.size(); ++t) acc[t] += r.states[t];
  }
  for (auto& v : acc) v /= n_runs;
  return acc;
}

double estimate_reliability(const LinearSystem& sys, const CostSpec& cost,
                            const GaussianSpec& truth, int N, double theta,
                            double beta, int T, const Eigen::VectorXd& x0,
                            int n_trials, std::uint64_t seed,
                            int n_runs_per_trial) {
  (void)beta;  // nominal risk level; recorded by callers, not used here
  if (n_trials < 1)
    throw SolverError(ErrorCode::DimensionMismatch,
                      "n_trials must be positive");
  const int k = static_cast<int>(truth.mean.size());
  const DisturbancePolicy truth_dist = DisturbancePolicy::sampler(truth);

  int passed = 0;
  for (int trial = 0; trial < n_trials; ++trial) {
    Philox4x32 rng(seed, 0x74726961u /* sample stream tag */ +
                             static_cast<std::uint64_t>(trial) * 2);
    Eigen::MatrixXd samples(k, N);
    for (int i = 0; i < N; ++i)
      samples.col(i) = truth.mean + truth.sigma * rng.normal_vector(k);
    const EmpiricalDistribution emp =
        EmpiricalDistribution::from_samples(std::move(samples));

    const tuning::TunedPenalty tuned =
        tuning::optimize_lambda_finite(sys, cost, emp, T, x0, theta, 1e-3);
    CostSpec horizon_cost = cost;
    horizon_cost.horizon = T;
    const finite_horizon::FiniteSolution sol =
        finite_horizon::solve_finite(sys, horizon_cost, {emp},
                                     tuned.lambda_star);
    const MonteCarloEstimate est = estimate_cost(
        sys, ControlPolicy::per_stage(sol.policies), truth_dist, x0, T,
        horizon_cost, n_runs_per_trial,
        seed + 1000003ull * (static_cast<std::uint64_t>(trial) + 1));
    if (est.mean <= tuned.upper_bound) ++passed;
  }
  return static_cast<double>(passed) / n_trials;
}

std::optional<double> settling_time(const std::vector<Eigen::VectorXd>& states,
                                    const std::vector<int>& components,
                                    double threshold_fraction, double dt) {
  if (states.empty())
    throw SolverError(ErrorCode::DimensionMismatch, "empty trajectory");
  const double initial_dev = states.front().cwiseAbs().maxCoeff();
  const double level = threshold_fraction * initial_dev;
  auto signal = [&](size_t t) {
    double s = 0.0;
    for (int c : components) s = std::max(s, std::abs(states[t](c)));
    return s;
  };
  int last_violation = -1;
  for (size_t t = 0; t < states.size(); ++t)
    if (signal(t) > level) last_violation = static_cast<int>(t);
  if (last_violation < 0) return 0.0;
  if (last_violation == static_cast<int>(states.size()) - 1)
    return std::nullopt;  // never settles within the horizon
  return (last_violation + 1) * dt;
}

double control_energy(const std::vector<Eigen::VectorXd>& inputs, int window) {
  if (window < 1 || window > static_cast<int>(inputs.size()))
    throw SolverError(ErrorCode::DimensionMismatch,
                      "window must lie within the input sequence");
  double acc = 0.0;
  for (int t = 0; t < window; ++t)
    acc += inputs[static_cast<size_t>(t)].squaredNorm();
  return acc / window;
}

}  // namespace wlqc::sim
