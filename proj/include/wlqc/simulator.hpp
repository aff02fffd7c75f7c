#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "wlqc/finite_horizon.hpp"
#include "wlqc/infinite_horizon.hpp"
#include "wlqc/model.hpp"
#include "wlqc/rng.hpp"

namespace wlqc::sim {

// Isotropic Gaussian N(mean, sigma^2 I).
struct GaussianSpec {
  Eigen::VectorXd mean;
  double sigma = 1.0;
};

// Stationary policy or one gain per stage.
class ControlPolicy {
 public:
  static ControlPolicy stationary(AffinePolicy policy);
  static ControlPolicy per_stage(std::vector<AffinePolicy> policies);

  const AffinePolicy& at(int t) const;
  bool is_stationary() const { return stationary_; }

 private:
  std::vector<AffinePolicy> policies_;
  bool stationary_ = true;
};

// Disturbance generator plugged into the rollout.  Distribution-valued
// kinds (the worst-case policies) draw one support atom per stage from the
// seeded stream and report a per-stage transport penalty under the
// per-sample matching convention (atom w*_i pairs with sample w_i).
class DisturbancePolicy {
 public:
  enum class Kind {
    Sampler,
    Empirical,
    WorstCaseFinite,
    WorstCaseSteady,
    HinfPointwise,
    FixedSequence,
  };

  static DisturbancePolicy sampler(GaussianSpec spec);
  static DisturbancePolicy empirical(const EmpiricalDistribution& emp);
  static DisturbancePolicy worst_case_finite(
      const finite_horizon::FiniteSolution& sol, const LinearSystem& sys,
      const EmpiricalDistribution& emp);
  static DisturbancePolicy worst_case_steady(
      const infinite_horizon::SteadySolution& sol, const LinearSystem& sys,
      const EmpiricalDistribution& emp);
  static DisturbancePolicy hinf_pointwise(
      const infinite_horizon::SteadySolution& sol, const LinearSystem& sys);
  static DisturbancePolicy fixed_sequence(std::vector<Eigen::VectorXd> ws);

  // Returns a copy whose worst-case support atoms are all shifted by
  // `shift` (an off-saddle opponent for the saddle-point checks).
  DisturbancePolicy with_support_shift(const Eigen::VectorXd& shift) const;

  // Returns a copy whose atoms are pulled toward their matched empirical
  // samples: w_i(x) <- alpha w_i(x) + (1-alpha) w_hat_i.  Shrinks the
  // per-sample matching distance by alpha, giving opponents strictly inside
  // an ambiguity ball.
  DisturbancePolicy interpolated_toward_matched(double alpha) const;

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  bool deterministic() const {
    return kind_ == Kind::HinfPointwise || kind_ == Kind::FixedSequence;
  }

  Eigen::VectorXd sample(int t, const Eigen::VectorXd& x,
                         Philox4x32& rng) const;

  // W2^2 of the stage distribution to the empirical one under per-sample
  // matching: (1/N) sum_i ||w*_i(x) - w_i||^2.  Zero for non-distribution
  // kinds.
  double stage_w2sq(int t, const Eigen::VectorXd& x) const;

 private:
  Kind kind_ = Kind::Sampler;
  int dim_ = 0;
  GaussianSpec gaussian_;
  Eigen::MatrixXd atoms_;                  // Empirical / FixedSequence data
  std::vector<Eigen::MatrixXd> gains_;     // S_t
  std::vector<Eigen::MatrixXd> offsets_;   // per-atom offsets c_{t,i}
  Eigen::MatrixXd matched_support_;        // empirical atoms for the penalty
  Eigen::VectorXd shift_;

  const Eigen::MatrixXd& gain_at(int t) const;
  const Eigen::MatrixXd& offsets_at(int t) const;
};

struct RolloutResult {
  std::vector<Eigen::VectorXd> states;        // T+1
  std::vector<Eigen::VectorXd> inputs;        // T
  std::vector<Eigen::VectorXd> disturbances;  // T
  std::vector<double> per_stage_costs;        // T entries x'Qx + u'Ru
  double total_cost = 0.0;      // sum of stage costs + terminal
  double penalized_cost = 0.0;  // total - lambda * sum of stage W2^2
};

// Deterministic given (seed, stream).  Divergence (|entry| > 1e12) raises
// NonFiniteState.
RolloutResult rollout(const LinearSystem& sys, const ControlPolicy& policy,
                      const DisturbancePolicy& dist, const Eigen::VectorXd& x0,
                      int T, const CostSpec& cost, std::uint64_t seed,
                      double lambda = 0.0, std::uint64_t stream = 0);

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  int n_runs = 0;
  std::uint64_t seed = 0;
};

// Mean and standard error of total_cost / T over independent runs (stream =
// run index).  The reduction is pairwise, so results do not depend on the
// number of workers.
MonteCarloEstimate estimate_cost(const LinearSystem& sys,
                                 const ControlPolicy& policy,
                                 const DisturbancePolicy& dist,
                                 const Eigen::VectorXd& x0, int T,
                                 const CostSpec& cost, int n_runs,
                                 std::uint64_t seed, int n_threads = 1);

// Componentwise mean trajectory over n_runs rollouts.
std::vector<Eigen::VectorXd> mean_trajectory(
    const LinearSystem& sys, const ControlPolicy& policy,
    const DisturbancePolicy& dist, const Eigen::VectorXd& x0, int T,
    const CostSpec& cost, int n_runs, std::uint64_t seed);

// Out-of-sample reliability: per trial, draw N fresh samples from `truth`,
// re-tune lambda* for the given theta, synthesize the policy, and check the
// Monte-Carlo out-of-sample cost against the guaranteed bound
// lambda* theta^2 + V(x0; lambda*).  Returns the passing fraction.
double estimate_reliability(const LinearSystem& sys, const CostSpec& cost,
                            const GaussianSpec& truth, int N, double theta,
                            double beta, int T, const Eigen::VectorXd& x0,
                            int n_trials, std::uint64_t seed,
                            int n_runs_per_trial = 200);

// First time (seconds) after which max_i |x_i(t)| over the given components
// stays below threshold_fraction * max_j |x_j(0)|; nullopt when the bound is
// still violated at the end of the horizon.
std::optional<double> settling_time(const std::vector<Eigen::VectorXd>& states,
                                    const std::vector<int>& components,
                                    double threshold_fraction, double dt);

// Mean squared input norm over the first `window` stages.
double control_energy(const std::vector<Eigen::VectorXd>& inputs, int window);

}  // namespace wlqc::sim
