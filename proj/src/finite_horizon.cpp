#include "wlqc/finite_horizon.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "wlqc/numeric.hpp"

namespace wlqc::finite_horizon {

namespace {

void check_dims(const ValueParams& next, const LinearSystem& sys,
                const CostSpec& cost, const EmpiricalDistribution& emp) {
  if (next.P.rows() != sys.n() || next.P.cols() != sys.n() ||
      next.r.size() != sys.n())
    throw SolverError(ErrorCode::DimensionMismatch,
                      "value parameters do not match the state dimension");
  if (cost.Q.rows() != sys.n() || cost.R.rows() != sys.m())
    throw SolverError(ErrorCode::DimensionMismatch,
                      "cost matrices do not match the system");
  if (emp.dim() != sys.k())
    throw SolverError(ErrorCode::DimensionMismatch,
                      "samples do not match the disturbance dimension");
}

// Shared backward step for both recursions; phi = B R^{-1} B' for the LQG
// variant and B R^{-1} B' - (1/lambda) Xi Xi' for the penalized one.
struct StepResult {
  ValueParams value;
  AffinePolicy policy;
};

StepResult affine_quadratic_step(const ValueParams& next,
                                 const LinearSystem& sys, const CostSpec& cost,
                                 const Eigen::MatrixXd& phi,
                                 const Eigen::VectorXd& wbar) {
  const int n = sys.n();
  const Eigen::MatrixXd& P1 = next.P;
  const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n) + P1 * phi;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
  if (lu.rcond() < 1e-12)
    throw SolverError(ErrorCode::SingularMatrix,
                      "I + P Phi is numerically singular (rcond " +
                          std::to_string(lu.rcond()) + ")");

  const Eigen::VectorXd drift = P1 * (sys.Xi * wbar) + next.r;
  const Eigen::MatrixXd m_inv_pa = lu.solve(P1 * sys.A);
  const Eigen::VectorXd m_inv_drift = lu.solve(drift);

  Eigen::LLT<Eigen::MatrixXd> r_chol(cost.R);

  StepResult out;
  out.value.P = numeric::symmetrize(cost.Q + sys.A.transpose() * m_inv_pa);
  out.value.r = sys.A.transpose() * m_inv_drift;
  out.policy.K = -r_chol.solve(sys.B.transpose() * m_inv_pa);
  out.policy.L = -r_chol.solve(sys.B.transpose() * m_inv_drift);
  return out;
}

}  // namespace

double FiniteSolution::value_at(const Eigen::VectorXd& x) const {
  const ValueParams& v0 = values.front();
  return x.dot(v0.P * x) + 2.0 * v0.r.dot(x) + v0.z;
}

std::pair<ValueParams, AffinePolicy> riccati_step(
    const ValueParams& next, const LinearSystem& sys, const CostSpec& cost,
    const EmpiricalDistribution& emp, double lambda) {
  check_dims(next, sys, cost, emp);
  const Eigen::MatrixXd& P1 = next.P;

  // Strict concavity of the inner maximization: lambda I - Xi'P Xi > 0.
  const Eigen::MatrixXd xi_p_xi =
      numeric::symmetrize(sys.Xi.transpose() * P1 * sys.Xi);
  const double margin = lambda - numeric::max_eigenvalue(xi_p_xi);
  if (margin <= numeric::kPdTol * (1.0 + lambda))
    throw SolverError(ErrorCode::PenaltyTooSmall,
                      "penalty margin " + std::to_string(margin) +
                          " is not positive: lambda I - Xi'P Xi must be PD");

  Eigen::LLT<Eigen::MatrixXd> r_chol(cost.R);
  const Eigen::MatrixXd phi =
      sys.B * r_chol.solve(sys.B.transpose()) -
      (1.0 / lambda) * (sys.Xi * sys.Xi.transpose());

  StepResult step = affine_quadratic_step(next, sys, cost, phi, emp.mean);
  step.value.z = next.z + detail::z_increment(P1, next.r, sys, cost, emp, lambda);
  return {std::move(step.value), std::move(step.policy)};
}

std::pair<ValueParams, AffinePolicy> lqg_riccati_step(
    const ValueParams& next, const LinearSystem& sys, const CostSpec& cost,
    const EmpiricalDistribution& emp) {
  check_dims(next, sys, cost, emp);
  const Eigen::MatrixXd& P1 = next.P;
  Eigen::LLT<Eigen::MatrixXd> r_chol(cost.R);
  const Eigen::MatrixXd g = sys.B * r_chol.solve(sys.B.transpose());

  StepResult step = affine_quadratic_step(next, sys, cost, g, emp.mean);
  step.value.z = next.z + detail::lqg_z_increment(P1, next.r, sys, cost, emp);
  return {std::move(step.value), std::move(step.policy)};
}

namespace detail {

double z_increment(const Eigen::MatrixXd& P, const Eigen::VectorXd& r,
                   const LinearSystem& sys, const CostSpec& cost,
                   const EmpiricalDistribution& emp, double lambda) {
  const int n = sys.n();
  const int k = sys.k();
  Eigen::LLT<Eigen::MatrixXd> r_chol(cost.R);
  const Eigen::MatrixXd phi =
      sys.B * r_chol.solve(sys.B.transpose()) -
      (1.0 / lambda) * (sys.Xi * sys.Xi.transpose());

  // (I - Xi'P Xi / lambda)^{-1} = lambda (lambda I - Xi'P Xi)^{-1}.
  const Eigen::MatrixXd xi_p_xi =
      numeric::symmetrize(sys.Xi.transpose() * P * sys.Xi);
  const Eigen::MatrixXd d = lambda * Eigen::MatrixXd::Identity(k, k) - xi_p_xi;
  Eigen::LDLT<Eigen::MatrixXd> d_ldlt(d);
  const double trace_term =
      lambda * d_ldlt.solve(xi_p_xi * emp.second_moment).trace();

  const Eigen::VectorXd a_vec = sys.Xi * emp.mean;
  Eigen::PartialPivLU<Eigen::MatrixXd> m_lu(
      Eigen::MatrixXd::Identity(n, n) + P * phi);
  const Eigen::MatrixXd n2 =
      Eigen::MatrixXd::Identity(n, n) -
      (1.0 / lambda) * P * (sys.Xi * sys.Xi.transpose());
  const Eigen::VectorXd p_a = P * a_vec;
  const double mean_term =
      a_vec.dot(m_lu.solve(p_a)) - a_vec.dot(n2.partialPivLu().solve(p_a));
  const double cross_term = (2.0 * a_vec - phi * r).dot(m_lu.solve(r));
  return trace_term + mean_term + cross_term;
}

double lqg_z_increment(const Eigen::MatrixXd& P, const Eigen::VectorXd& r,
                       const LinearSystem& sys, const CostSpec& cost,
                       const EmpiricalDistribution& emp) {
  const int n = sys.n();
  Eigen::LLT<Eigen::MatrixXd> r_chol(cost.R);
  const Eigen::MatrixXd g = sys.B * r_chol.solve(sys.B.transpose());
  Eigen::PartialPivLU<Eigen::MatrixXd> m_lu(
      Eigen::MatrixXd::Identity(n, n) + P * g);
  const Eigen::VectorXd a_vec = sys.Xi * emp.mean;
  const double trace_term =
      (sys.Xi.transpose() * P * sys.Xi * emp.second_moment).trace();
  const double mean_term = -a_vec.dot(P * g * m_lu.solve(P * a_vec));
  const double cross_term = (2.0 * a_vec - g * r).dot(m_lu.solve(r));
  return trace_term + mean_term + cross_term;
}

}  // namespace detail

namespace {

FiniteSolution backward_pass(const LinearSystem& sys, const CostSpec& cost,
                             const std::vector<EmpiricalDistribution>& emps,
                             double lambda, bool lqg) {
  const int horizon = cost.horizon;
  if (horizon < 1)
    throw SolverError(ErrorCode::DimensionMismatch,
                      "finite solve needs a positive horizon");
  if (emps.empty() ||
      (emps.size() != 1 && static_cast<int>(emps.size()) != horizon))
    throw SolverError(
        ErrorCode::DimensionMismatch,
        "emp_per_stage must hold one distribution or one per stage");

  auto emp_at = [&](int t) -> const EmpiricalDistribution& {
    return emps.size() == 1 ? emps.front() : emps[static_cast<size_t>(t)];
  };

  FiniteSolution sol;
  sol.lambda = lambda;
  sol.values.resize(static_cast<size_t>(horizon) + 1);
  sol.policies.resize(static_cast<size_t>(horizon));
  sol.values[static_cast<size_t>(horizon)] =
      ValueParams{cost.Qf, Eigen::VectorXd::Zero(sys.n()), 0.0};

  double worst_margin = std::numeric_limits<double>::infinity();
  for (int t = horizon - 1; t >= 0; --t) {
    const ValueParams& next = sol.values[static_cast<size_t>(t) + 1];
    if (!lqg) {
      const double margin =
          lambda - numeric::max_eigenvalue(sys.Xi.transpose() * next.P * sys.Xi);
      worst_margin = std::min(worst_margin, margin);
    }
    try {
      auto [value, policy] =
          lqg ? lqg_riccati_step(next, sys, cost, emp_at(t))
              : riccati_step(next, sys, cost, emp_at(t), lambda);
      sol.values[static_cast<size_t>(t)] = std::move(value);
      sol.policies[static_cast<size_t>(t)] = std::move(policy);
    } catch (const SolverError& err) {
      throw SolverError(err.code(),
                        std::string(err.what()) + " (stage t=" +
                            std::to_string(t) + ")",
                        t);
    }
  }
  sol.assumption_margin = lqg ? std::numeric_limits<double>::infinity()
                              : worst_margin;
  return sol;
}

}  // namespace

FiniteSolution solve_finite(const LinearSystem& sys, const CostSpec& cost,
                            const std::vector<EmpiricalDistribution>& emp_per_stage,
                            double lambda) {
  return backward_pass(sys, cost, emp_per_stage, lambda, /*lqg=*/false);
}

FiniteSolution solve_finite_lqg(
    const LinearSystem& sys, const CostSpec& cost,
    const std::vector<EmpiricalDistribution>& emp_per_stage) {
  return backward_pass(sys, cost, emp_per_stage, 0.0, /*lqg=*/true);
}

DiscreteDistribution worst_case_distribution(int t, const Eigen::VectorXd& x,
                                             const FiniteSolution& sol,
                                             const LinearSystem& sys,
                                             const EmpiricalDistribution& emp) {
  if (t < 0 || t >= sol.horizon())
    throw SolverError(ErrorCode::DimensionMismatch,
                      "stage index outside the horizon");
  const double lambda = sol.lambda;
  const ValueParams& next = sol.values[static_cast<size_t>(t) + 1];
  const AffinePolicy& policy = sol.policies[static_cast<size_t>(t)];

  const Eigen::MatrixXd xi_p_xi =
      numeric::symmetrize(sys.Xi.transpose() * next.P * sys.Xi);
  const double margin = lambda - numeric::max_eigenvalue(xi_p_xi);
  if (margin <= numeric::kPdTol * (1.0 + lambda))
    throw SolverError(ErrorCode::PenaltyTooSmall,
                      "penalty margin is not positive at stage " +
                          std::to_string(t),
                      t);
  const Eigen::MatrixXd d =
      lambda * Eigen::MatrixXd::Identity(sys.k(), sys.k()) - xi_p_xi;
  Eigen::LDLT<Eigen::MatrixXd> d_ldlt(d);

  const Eigen::VectorXd mean_next =
      next.P * ((sys.A + sys.B * policy.K) * x + sys.B * policy.L) + next.r;
  Eigen::MatrixXd support(sys.k(), emp.count());
  for (int i = 0; i < emp.count(); ++i) {
    support.col(i) = d_ldlt.solve(sys.Xi.transpose() * mean_next +
                                  lambda * emp.support.col(i));
  }
  return DiscreteDistribution::uniform(std::move(support));
}

Eigen::VectorXd hinf_worst_disturbance(int t, const Eigen::VectorXd& x,
                                       const FiniteSolution& sol,
                                       const LinearSystem& sys) {
  if (t < 0 || t >= sol.horizon())
    throw SolverError(ErrorCode::DimensionMismatch,
                      "stage index outside the horizon");
  const double lambda = sol.lambda;
  const ValueParams& next = sol.values[static_cast<size_t>(t) + 1];
  const AffinePolicy& policy = sol.policies[static_cast<size_t>(t)];
  const Eigen::MatrixXd xi_p_xi =
      numeric::symmetrize(sys.Xi.transpose() * next.P * sys.Xi);
  const double margin = lambda - numeric::max_eigenvalue(xi_p_xi);
  if (margin <= numeric::kPdTol * (1.0 + lambda))
    throw SolverError(ErrorCode::PenaltyTooSmall,
                      "penalty margin is not positive at stage " +
                          std::to_string(t),
                      t);
  const Eigen::MatrixXd d =
      lambda * Eigen::MatrixXd::Identity(sys.k(), sys.k()) - xi_p_xi;
  return Eigen::LDLT<Eigen::MatrixXd>(d).solve(
      sys.Xi.transpose() * (next.P * ((sys.A + sys.B * policy.K) * x)));
}

}  // namespace wlqc::finite_horizon
