#pragma once

#include <limits>
#include <utility>
#include <vector>

#include "wlqc/model.hpp"

namespace wlqc::tuning {

// Critical penalty thresholds.  lambda_hat applies to a fixed finite
// horizon; lambda_hat1/lambda_hat2/lambda_hat_inf to the average-cost
// setting, with lambda_hat_inf = max(lambda_hat1, lambda_hat2).
struct LambdaProfile {
  double lambda_hat = std::numeric_limits<double>::quiet_NaN();
  double lambda_hat1 = 0.0;
  double lambda_hat2 = 0.0;
  double lambda_hat_inf = 0.0;
  double search_tol = 0.0;
};

// Binary search for inf{lambda : the T-stage recursion keeps
// lambda I - Xi'P_t Xi > 0 for t = 1..T}.  Bracket: failure expected at
// the floor `tol`, success required at 1e9 (else BracketFailure).
double find_lambda_hat_finite(const LinearSystem& sys, const CostSpec& cost,
                              const EmpiricalDistribution& emp, int T,
                              double tol);

// lambda_hat1: threshold of {Phi PSD and (A, Phi^{1/2}) stabilizable};
// lambda_hat2: threshold of "the fixed-point iteration keeps the penalty
// margin at every iterate" (cap 1e12, else Lambda2Infinite).
LambdaProfile find_lambda_profile_infinite(const LinearSystem& sys,
                                           const CostSpec& cost,
                                           const EmpiricalDistribution& emp,
                                           double tol);

struct TunedPenalty {
  double lambda_star = 0.0;
  double upper_bound = 0.0;  // objective value at lambda_star
  double theta = 0.0;
  std::vector<std::pair<double, double>> evaluations;  // (lambda, objective)
  // Set when the objective kept decreasing up to the search cap (theta too
  // small to turn the curve upward); lambda_star sits at the cap then.
  bool monotone_tail = false;
};

// Golden-section minimization of lambda theta^2 + V(x0; lambda) over
// (lambda_hat + tol, lambda_hi), lambda_hi doubled adaptively.
TunedPenalty optimize_lambda_finite(const LinearSystem& sys,
                                    const CostSpec& cost,
                                    const EmpiricalDistribution& emp, int T,
                                    const Eigen::VectorXd& x0, double theta,
                                    double tol);

// Same for lambda theta^2 + rho(lambda) over (lambda_hat_inf + tol, ...).
TunedPenalty optimize_lambda_infinite(const LinearSystem& sys,
                                      const CostSpec& cost,
                                      const EmpiricalDistribution& emp,
                                      double theta, double tol);

}  // namespace wlqc::tuning
