#pragma once

#include <utility>
#include <vector>

#include "wlqc/model.hpp"

namespace wlqc::robustness {

// Exact 2-Wasserstein distance between finitely supported distributions.
// Uniform equal-size supports are solved as an assignment problem
// (exhaustive for N <= 8, shortest-augmenting-path Hungarian above);
// the general weighted case runs a transportation simplex.
double wasserstein2(const DiscreteDistribution& mu,
                    const DiscreteDistribution& nu);

// Membership in the closed ball { mu : W2(mu, nu) <= theta }.
bool in_ambiguity_set(const DiscreteDistribution& mu,
                      const EmpiricalDistribution& emp, double theta);

// Inputs of the out-of-sample radius formulas.  The concentration constants
// c1, c2 have no values in the source bound (they depend on the tail profile
// only); the defaults c1 = c2 = 1 are non-normative configuration.
struct RadiusParams {
  int N = 1;          // sample count
  double beta = 0.1;  // risk level in (0,1)
  int T = 1;          // horizon (T = 1 under stationarity)
  int k = 1;          // disturbance dimension
  double c1 = 1.0;
  double c2 = 1.0;
  double q = 4.0;     // light-tail exponent, > 2
  double zeta = 1.0;  // support half-diameter (compact case)
};

// Light-tail radius theta(N, beta):
//   c = log(c1 / (1 - (1-beta)^{1/T})) / (N c2),
//   theta = c^{1/q}                 if c > 1,
//           c^{1/4}                 if c <= 1 and k < 4,
//           c^{1/k}                 if c <= 1 and k > 4,
//           root of t^2/log(2+1/t^2) = sqrt(c)   if c <= 1 and k = 4.
double radius_light_tail(const RadiusParams& params);

// Compactly supported variant with half-diameter zeta.
double radius_compact(const RadiusParams& params);

// Tabulates theta over a grid of sample counts; checks the table is
// nonincreasing in N (a violated audit throws).
std::vector<std::pair<int, double>> radius_sensitivity(
    RadiusParams params, const std::vector<int>& sample_counts,
    bool compact = false);

// Exposed matching solvers (also exercised directly by audits/tests).
// All take a square cost matrix; returned value is the matching cost
// evaluated in canonical row order.
std::vector<int> assign_exhaustive(const Eigen::MatrixXd& cost);
std::vector<int> assign_hungarian(const Eigen::MatrixXd& cost);
double matching_cost(const Eigen::MatrixXd& cost,
                     const std::vector<int>& assignment);

// Exact optimal-transport cost (not squared-rooted) for general marginals,
// via the transportation simplex.  `cost(i, j)` pairs source atom i with
// target atom j.
double transport_cost(const Eigen::MatrixXd& cost, const Eigen::VectorXd& a,
                      const Eigen::VectorXd& b);

}  // namespace wlqc::robustness
