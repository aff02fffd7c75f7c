#pragma once

#include <utility>
#include <vector>

#include "wlqc/model.hpp"

namespace wlqc::finite_horizon {

// Quadratic value function V(x) = x'Px + 2r'x + z.
struct ValueParams {
  Eigen::MatrixXd P;
  Eigen::VectorXd r;
  double z = 0.0;

  static ValueParams zero(int n) {
    return ValueParams{Eigen::MatrixXd::Zero(n, n), Eigen::VectorXd::Zero(n),
                       0.0};
  }
};

struct FiniteSolution {
  std::vector<ValueParams> values;      // stage t = 0..T
  std::vector<AffinePolicy> policies;   // stage t = 0..T-1
  double lambda = 0.0;
  // min over t >= 1 of (lambda - max eig(Xi' P_t Xi)); positive iff the
  // penalty condition held along the whole recursion.
  double assumption_margin = 0.0;

  int horizon() const { return static_cast<int>(policies.size()); }

  // V_0(x) = x'P_0 x + 2 r_0'x + z_0.
  double value_at(const Eigen::VectorXd& x) const;
};

// One backward step of the penalized Riccati recursion.  With
// Phi = B R^{-1} B' - (1/lambda) Xi Xi' and M = I + P_{t+1} Phi:
//   P_t = Q + A' M^{-1} P_{t+1} A
//   r_t = A' M^{-1} (P_{t+1} Xi wbar + r_{t+1})
//   K_t = -R^{-1} B' M^{-1} P_{t+1} A
//   L_t = -R^{-1} B' M^{-1} (P_{t+1} Xi wbar + r_{t+1})
// plus the z recursion.  Requires lambda I - Xi' P_{t+1} Xi > 0.
std::pair<ValueParams, AffinePolicy> riccati_step(
    const ValueParams& next, const LinearSystem& sys, const CostSpec& cost,
    const EmpiricalDistribution& emp, double lambda);

// Standard LQG backward step (the lambda -> infinity limit of riccati_step).
std::pair<ValueParams, AffinePolicy> lqg_riccati_step(
    const ValueParams& next, const LinearSystem& sys, const CostSpec& cost,
    const EmpiricalDistribution& emp);

// Full backward pass from P_T = Qf, r_T = 0, z_T = 0.  emp_per_stage holds
// either one distribution per stage (size T, entry t used at stage t) or a
// single distribution reused at every stage (the stationary case).
FiniteSolution solve_finite(const LinearSystem& sys, const CostSpec& cost,
                            const std::vector<EmpiricalDistribution>& emp_per_stage,
                            double lambda);

// LQG baseline over the same horizon.
FiniteSolution solve_finite_lqg(
    const LinearSystem& sys, const CostSpec& cost,
    const std::vector<EmpiricalDistribution>& emp_per_stage);

// Worst-case distribution at stage t and state x: uniform weights on
//   w*_i(x) = (lambda I - Xi'P_{t+1}Xi)^{-1}
//             (Xi'P_{t+1}((A + B K_t)x + B L_t) + Xi'r_{t+1} + lambda w_i).
DiscreteDistribution worst_case_distribution(int t, const Eigen::VectorXd& x,
                                             const FiniteSolution& sol,
                                             const LinearSystem& sys,
                                             const EmpiricalDistribution& emp);

// Pointwise worst-case disturbance of the deterministic dynamic game:
//   (lambda I - Xi'P_{t+1}Xi)^{-1} Xi'P_{t+1}(A + B K_t) x.
// Each worst-case support atom equals this plus a sample-dependent shift.
Eigen::VectorXd hinf_worst_disturbance(int t, const Eigen::VectorXd& x,
                                       const FiniteSolution& sol,
                                       const LinearSystem& sys);

namespace detail {

// z_t - z_{t+1} of the penalized recursion, evaluated at (P, r) = next
// stage's coefficients.  At a fixed point this is the stationary average
// cost per stage.
double z_increment(const Eigen::MatrixXd& P, const Eigen::VectorXd& r,
                   const LinearSystem& sys, const CostSpec& cost,
                   const EmpiricalDistribution& emp, double lambda);

// Same quantity for the standard LQG recursion.
double lqg_z_increment(const Eigen::MatrixXd& P, const Eigen::VectorXd& r,
                       const LinearSystem& sys, const CostSpec& cost,
                       const EmpiricalDistribution& emp);

}  // namespace detail

}  // namespace wlqc::finite_horizon
