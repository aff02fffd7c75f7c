#include "wlqc/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "bisect.hpp"
#include "wlqc/finite_horizon.hpp"
#include "wlqc/infinite_horizon.hpp"

namespace wlqc::tuning {

namespace {

constexpr double kLambdaCap = 1e9;
constexpr double kLambdaCapInfinite = 1e12;
constexpr int kGoldenMaxIter = 200;

CostSpec with_horizon(const CostSpec& cost, int T) {
  CostSpec c = cost;
  c.horizon = T;
  return c;
}

// Scalar objective wrapper that records every evaluation.
struct Recorder {
  std::function<double(double)> f;
  std::vector<std::pair<double, double>>* log;

  double operator()(double lambda) const {
    const double value = f(lambda);
    log->push_back({lambda, value});
    return value;
  }
};

// Golden-section minimization on [a, b] for a unimodal objective.  The
// interval is shrunk to half the tolerance so the returned midpoint sits
// within tol/2 of the true minimizer.
double golden_section(const Recorder& f, double a, double b, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < kGoldenMaxIter && (b - a) > 0.5 * tol; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// Shared driver for both penalty optimizers: expand the right edge until
// the objective turns upward, then golden-section the bracket.
TunedPenalty minimize_penalty_objective(const std::function<double(double)>& raw,
                                        double lambda_floor, double theta,
                                        double tol, double cap) {
  TunedPenalty tuned;
  tuned.theta = theta;
  Recorder f{raw, &tuned.evaluations};

  const double lo = lambda_floor + tol;
  double prev_lambda = lo;
  double prev_value = f(lo);
  double best_lambda = prev_lambda;
  double best_value = prev_value;

  // Geometric expansion; once the objective turns upward the minimum sits
  // between the last two points before the increase.
  double left = lo;
  double right = lo;
  bool bracketed = false;
  double edge = std::max(2.0 * lo, lo + 1.0);
  while (true) {
    const double point = std::min(edge, cap);
    const double value = f(point);
    if (value < best_value) {
      best_value = value;
      best_lambda = point;
    }
    if (value > prev_value) {
      bracketed = true;
      right = point;
      break;
    }
    left = prev_lambda;
    prev_lambda = point;
    prev_value = value;
    if (point >= cap) break;
    edge *= 2.0;
  }

  if (!bracketed) {
    // Objective still nonincreasing at the cap.
    tuned.monotone_tail = true;
    tuned.lambda_star = prev_lambda;
    tuned.upper_bound = prev_value;
    return tuned;
  }

  const double star = golden_section(f, left, right, tol);
  tuned.lambda_star = star;
  tuned.upper_bound = f(star);
  if (tuned.upper_bound > best_value) {
    // Keep the best sampled point if golden landed a hair worse.
    tuned.lambda_star = best_lambda;
    tuned.upper_bound = best_value;
  }
  return tuned;
}

}  // namespace

double find_lambda_hat_finite(const LinearSystem& sys, const CostSpec& cost,
                              const EmpiricalDistribution& emp, int T,
                              double tol) {
  const CostSpec horizon_cost = with_horizon(cost, T);
  auto passes = [&](double lambda) {
    try {
      finite_horizon::solve_finite(sys, horizon_cost, {emp}, lambda);
      return true;
    } catch (const SolverError&) {
      return false;
    }
  };
  return detail::bisect_threshold(passes, tol, kLambdaCap, tol,
                                  ErrorCode::BracketFailure,
                                  "recursion fails even at lambda = 1e9");
}

LambdaProfile find_lambda_profile_infinite(const LinearSystem& sys,
                                           const CostSpec& cost,
                                           const EmpiricalDistribution& emp,
                                           double tol) {
  (void)emp;  // thresholds depend on the plant and cost only
  LambdaProfile profile;
  profile.search_tol = tol;

  auto phi_ok = [&](double lambda) {
    const auto cert = infinite_horizon::check_assumptions(sys, cost, lambda);
    return cert.phi_psd && cert.stabilizable;
  };
  // Descending sweep to find a failing left edge, then bisect.
  if (phi_ok(tol)) {
    profile.lambda_hat1 = tol;
  } else {
    if (!phi_ok(kLambdaCapInfinite))
      throw SolverError(ErrorCode::AssumptionViolated,
                        "Phi never becomes PSD/stabilizable below 1e12");
    double hi = kLambdaCapInfinite;
    double lo = hi;
    while (lo > tol && phi_ok(lo / 4.0)) lo /= 4.0;
    lo = std::max(tol, lo / 4.0);
    profile.lambda_hat1 = detail::bisect_threshold(
        phi_ok, lo, hi, tol, ErrorCode::AssumptionViolated,
        "lost the lambda_hat1 bracket");
  }

  auto margin_ok = [&](double lambda) {
    return infinite_horizon::penalty_margin_holds_along_iteration(sys, cost,
                                                                  lambda);
  };
  profile.lambda_hat2 = detail::bisect_threshold(
      margin_ok, tol, kLambdaCapInfinite, tol, ErrorCode::Lambda2Infinite,
      "no lambda up to 1e12 keeps the penalty margin along the iteration");

  profile.lambda_hat_inf = std::max(profile.lambda_hat1, profile.lambda_hat2);
  return profile;
}

TunedPenalty optimize_lambda_finite(const LinearSystem& sys,
                                    const CostSpec& cost,
                                    const EmpiricalDistribution& emp, int T,
                                    const Eigen::VectorXd& x0, double theta,
                                    double tol) {
  if (theta < 0.0)
    throw SolverError(ErrorCode::InvalidRisk, "theta must be nonnegative");
  const double lambda_hat = find_lambda_hat_finite(sys, cost, emp, T, tol);
  const CostSpec horizon_cost = with_horizon(cost, T);
  auto objective = [&](double lambda) {
    const finite_horizon::FiniteSolution sol =
        finite_horizon::solve_finite(sys, horizon_cost, {emp}, lambda);
    return lambda * theta * theta + sol.value_at(x0) / T;
  };
  return minimize_penalty_objective(objective, lambda_hat, theta, tol,
                                    kLambdaCap);
}

TunedPenalty optimize_lambda_infinite(const LinearSystem& sys,
                                      const CostSpec& cost,
                                      const EmpiricalDistribution& emp,
                                      double theta, double tol) {
  if (theta < 0.0)
    throw SolverError(ErrorCode::InvalidRisk, "theta must be nonnegative");
  const LambdaProfile profile =
      find_lambda_profile_infinite(sys, cost, emp, tol);
  auto objective = [&](double lambda) {
    const infinite_horizon::SteadySolution sol =
        infinite_horizon::solve_are_fixed_point(sys, cost, emp, lambda);
    return lambda * theta * theta + sol.rho;
  };
  return minimize_penalty_objective(objective, profile.lambda_hat_inf, theta,
                                    tol, kLambdaCap);
}

}  // namespace wlqc::tuning
