#include "wlqc/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace wlqc::robustness {

namespace {

Eigen::MatrixXd squared_distance_matrix(const Eigen::MatrixXd& xs,
                                        const Eigen::MatrixXd& ys) {
  Eigen::MatrixXd cost(xs.cols(), ys.cols());
  for (int i = 0; i < xs.cols(); ++i)
    for (int j = 0; j < ys.cols(); ++j)
      cost(i, j) = (xs.col(i) - ys.col(j)).squaredNorm();
  return cost;
}

bool is_uniform(const Eigen::VectorXd& w) {
  return (w.array() - 1.0 / w.size()).abs().maxCoeff() <= 1e-12;
}

}  // namespace

std::vector<int> assign_exhaustive(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  std::vector<int> perm(n), best(n);
  std::iota(perm.begin(), perm.end(), 0);
  best = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += cost(i, perm[i]);
    if (total < best_cost) {
      best_cost = total;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

std::vector<int> assign_hungarian(const Eigen::MatrixXd& cost) {
  // Shortest augmenting path formulation with potentials (O(n^3)).
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      int j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(n);
  for (int j = 1; j <= n; ++j) assignment[match[j] - 1] = j - 1;
  return assignment;
}

double matching_cost(const Eigen::MatrixXd& cost,
                     const std::vector<int>& assignment) {
  double total = 0.0;
  for (int i = 0; i < static_cast<int>(assignment.size()); ++i)
    total += cost(i, assignment[i]);
  return total;
}

namespace {

// Transportation simplex on a dense cost matrix.  Basis cells form a
// spanning tree of the bipartite supply/demand graph; degenerate basic
// cells carry zero flow.
class TransportSimplex {
 public:
  TransportSimplex(const Eigen::MatrixXd& cost, Eigen::VectorXd supply,
                   Eigen::VectorXd demand)
      : cost_(cost),
        supply_(std::move(supply)),
        demand_(std::move(demand)),
        rows_(static_cast<int>(cost.rows())),
        cols_(static_cast<int>(cost.cols())),
        flow_(Eigen::MatrixXd::Zero(cost.rows(), cost.cols())),
        basic_(Eigen::Matrix<char, Eigen::Dynamic, Eigen::Dynamic>::Zero(
            cost.rows(), cost.cols())) {}

  double solve() {
    northwest_corner();
    const double scale = 1.0 + cost_.cwiseAbs().maxCoeff();
    // Iteration cap: every pivot strictly decreases cost except for
    // degenerate pivots, which are rare at this scale.
    const int max_pivots = 50 * (rows_ + cols_) * (rows_ + cols_) + 1000;
    for (int it = 0; it < max_pivots; ++it) {
      compute_potentials();
      int ei = -1, ej = -1;
      double most_negative = -1e-12 * scale;
      for (int i = 0; i < rows_; ++i) {
        for (int j = 0; j < cols_; ++j) {
          if (basic_(i, j)) continue;
          const double reduced = cost_(i, j) - up_[i] - vp_[j];
          if (reduced < most_negative) {
            most_negative = reduced;
            ei = i;
            ej = j;
          }
        }
      }
      if (ei < 0) return (flow_.array() * cost_.array()).sum();
      pivot(ei, ej);
    }
    throw SolverError(ErrorCode::NoConvergence,
                      "transportation simplex failed to terminate");
  }

 private:
  void northwest_corner() {
    Eigen::VectorXd s = supply_, d = demand_;
    int i = 0, j = 0;
    while (i < rows_ && j < cols_) {
      const double moved = std::min(s(i), d(j));
      flow_(i, j) = moved;
      basic_(i, j) = 1;
      s(i) -= moved;
      d(j) -= moved;
      if (i == rows_ - 1 && j == cols_ - 1) break;
      // Advance along the smaller residual; ties advance the row so the
      // basis keeps exactly rows+cols-1 cells.
      if (s(i) <= d(j) && i < rows_ - 1) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  void compute_potentials() {
    up_.assign(rows_, std::numeric_limits<double>::quiet_NaN());
    vp_.assign(cols_, std::numeric_limits<double>::quiet_NaN());
    up_[0] = 0.0;
    while (true) {
      bool progress = true;
      while (progress) {
        progress = false;
        for (int i = 0; i < rows_; ++i) {
          for (int j = 0; j < cols_; ++j) {
            if (!basic_(i, j)) continue;
            if (!std::isnan(up_[i]) && std::isnan(vp_[j])) {
              vp_[j] = cost_(i, j) - up_[i];
              progress = true;
            } else if (std::isnan(up_[i]) && !std::isnan(vp_[j])) {
              up_[i] = cost_(i, j) - vp_[j];
              progress = true;
            }
          }
        }
      }
      // A degenerate pivot can leave a stray component; pin it and resume.
      int stray = -1;
      for (int i = 0; i < rows_; ++i) {
        if (std::isnan(up_[i])) {
          stray = i;
          break;
        }
      }
      if (stray < 0) break;
      up_[stray] = 0.0;
    }
    for (int j = 0; j < cols_; ++j)
      if (std::isnan(vp_[j])) vp_[j] = 0.0;
  }

  // The entering cell closes exactly one cycle with the basis tree.  Leaf
  // pruning isolates it: repeatedly drop cells whose row or column holds a
  // single remaining cell; the survivors are the cycle.
  void pivot(int ei, int ej) {
    basic_(ei, ej) = 1;
    Eigen::Matrix<char, Eigen::Dynamic, Eigen::Dynamic> active = basic_;
    std::vector<int> row_count(rows_, 0), col_count(cols_, 0);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j)
        if (active(i, j)) {
          ++row_count[i];
          ++col_count[j];
        }
    bool pruned = true;
    while (pruned) {
      pruned = false;
      for (int i = 0; i < rows_; ++i) {
        for (int j = 0; j < cols_; ++j) {
          if (!active(i, j)) continue;
          if (row_count[i] == 1 || col_count[j] == 1) {
            active(i, j) = 0;
            --row_count[i];
            --col_count[j];
            pruned = true;
          }
        }
      }
    }
    if (!active(ei, ej)) {
      basic_(ei, ej) = 0;
      throw SolverError(ErrorCode::NoConvergence,
                        "transportation simplex lost the basis tree");
    }

    // Walk the cycle from the entering cell, alternating row/column moves.
    std::vector<std::pair<int, int>> cycle;
    int ci = ei, cj = ej;
    bool move_in_row = true;
    do {
      cycle.push_back({ci, cj});
      if (move_in_row) {
        for (int j = 0; j < cols_; ++j) {
          if (j != cj && active(ci, j)) {
            cj = j;
            break;
          }
        }
      } else {
        for (int i = 0; i < rows_; ++i) {
          if (i != ci && active(i, cj)) {
            ci = i;
            break;
          }
        }
      }
      move_in_row = !move_in_row;
    } while (ci != ei || cj != ej);

    double limit = std::numeric_limits<double>::infinity();
    size_t leave = 0;
    for (size_t idx = 1; idx < cycle.size(); idx += 2) {
      const auto [i, j] = cycle[idx];
      if (flow_(i, j) < limit) {
        limit = flow_(i, j);
        leave = idx;
      }
    }
    for (size_t idx = 0; idx < cycle.size(); ++idx) {
      const auto [i, j] = cycle[idx];
      flow_(i, j) += (idx % 2 == 0) ? limit : -limit;
    }
    const auto [li, lj] = cycle[leave];
    basic_(li, lj) = 0;
    flow_(li, lj) = 0.0;
  }

  const Eigen::MatrixXd& cost_;
  Eigen::VectorXd supply_, demand_;
  int rows_, cols_;
  Eigen::MatrixXd flow_;
  Eigen::Matrix<char, Eigen::Dynamic, Eigen::Dynamic> basic_;
  std::vector<double> up_, vp_;
};

}  // namespace

double transport_cost(const Eigen::MatrixXd& cost, const Eigen::VectorXd& a,
                      const Eigen::VectorXd& b) {
  if (cost.rows() != a.size() || cost.cols() != b.size())
    throw SolverError(ErrorCode::DimensionMismatch,
                      "transport_cost marginal sizes do not match cost matrix");
  TransportSimplex simplex(cost, a, b);
  return simplex.solve();
}

double wasserstein2(const DiscreteDistribution& mu,
                    const DiscreteDistribution& nu) {
  if (mu.dim() != nu.dim())
    throw SolverError(ErrorCode::DimensionMismatch,
                      "wasserstein2 dimension mismatch");
  const Eigen::MatrixXd cost = squared_distance_matrix(mu.support, nu.support);
  double squared = 0.0;
  if (mu.count() == nu.count() && is_uniform(mu.weights) &&
      is_uniform(nu.weights)) {
    const std::vector<int> assignment =
        mu.count() <= 8 ? assign_exhaustive(cost) : assign_hungarian(cost);
    squared = matching_cost(cost, assignment) / mu.count();
  } else {
    squared = transport_cost(cost, mu.weights, nu.weights);
  }
  return std::sqrt(std::max(0.0, squared));
}

bool in_ambiguity_set(const DiscreteDistribution& mu,
                      const EmpiricalDistribution& emp, double theta) {
  if (theta < 0.0)
    throw SolverError(ErrorCode::InvalidRisk, "theta must be nonnegative");
  return wasserstein2(mu, to_discrete(emp)) <= theta + 1e-12;
}

namespace {

void check_radius_params(const RadiusParams& p, bool need_zeta) {
  if (p.beta <= 0.0 || p.beta >= 1.0)
    throw SolverError(ErrorCode::InvalidRisk, "beta must lie in (0,1)");
  if (p.N < 1)
    throw SolverError(ErrorCode::InvalidRisk, "N must be at least 1");
  if (p.T < 1)
    throw SolverError(ErrorCode::InvalidRisk, "T must be at least 1");
  if (p.c1 <= 0.0 || p.c2 <= 0.0)
    throw SolverError(ErrorCode::InvalidRisk, "c1, c2 must be positive");
  if (p.q <= 2.0)
    throw SolverError(ErrorCode::InvalidRisk, "q must exceed 2");
  if (need_zeta && p.zeta <= 0.0)
    throw SolverError(ErrorCode::InvalidRisk, "zeta must be positive");
}

double concentration_exponent(const RadiusParams& p) {
  const double denom = 1.0 - std::pow(1.0 - p.beta, 1.0 / p.T);
  const double c = std::log(p.c1 / denom) / (p.N * p.c2);
  if (!(c > 0.0))
    throw SolverError(ErrorCode::InvalidRisk,
                      "c1 too small: concentration exponent is nonpositive");
  return c;
}

// Solves t^2 / (zeta^2 log(2 + zeta^2/t^2)) = sqrt(c) for t; the left side
// is strictly increasing in t.
double solve_k4(double c, double zeta) {
  const double target = std::sqrt(c);
  auto f = [zeta](double t) {
    const double t2 = t * t;
    return t2 / (zeta * zeta * std::log(2.0 + zeta * zeta / t2));
  };
  double lo = 1e-300, hi = 1.0;
  while (f(hi) < target) hi *= 2.0;
  for (int i = 0; i < 400; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double radius_light_tail(const RadiusParams& params) {
  check_radius_params(params, /*need_zeta=*/false);
  const double c = concentration_exponent(params);
  if (c > 1.0) return std::pow(c, 1.0 / params.q);
  if (params.k < 4) return std::pow(c, 0.25);
  if (params.k > 4) return std::pow(c, 1.0 / params.k);
  return solve_k4(c, 1.0);
}

double radius_compact(const RadiusParams& params) {
  check_radius_params(params, /*need_zeta=*/true);
  const double c = concentration_exponent(params);
  if (params.k < 4) return std::pow(c, 0.25) * params.zeta;
  if (params.k > 4) return std::pow(c, 1.0 / params.k) * params.zeta;
  return solve_k4(c, params.zeta);
}

std::vector<std::pair<int, double>> radius_sensitivity(
    RadiusParams params, const std::vector<int>& sample_counts, bool compact) {
  std::vector<std::pair<int, double>> table;
  table.reserve(sample_counts.size());
  for (int n : sample_counts) {
    params.N = n;
    table.push_back(
        {n, compact ? radius_compact(params) : radius_light_tail(params)});
  }
  std::vector<std::pair<int, double>> sorted = table;
  std::sort(sorted.begin(), sorted.end());
  for (size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].second > sorted[i - 1].second + 1e-12)
      throw SolverError(ErrorCode::InvalidRisk,
                        "radius table is not nonincreasing in N");
  }
  return table;
}

}  // namespace wlqc::robustness
