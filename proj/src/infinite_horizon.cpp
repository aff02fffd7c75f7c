#include "wlqc/infinite_horizon.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "bisect.hpp"
#include "wlqc/finite_horizon.hpp"
#include "wlqc/numeric.hpp"

namespace wlqc::infinite_horizon {

namespace {

constexpr double kAreResidualTol = 1e-8;

Eigen::MatrixXd make_phi(const LinearSystem& sys, const CostSpec& cost,
                         double lambda) {
  Eigen::LLT<Eigen::MatrixXd> r_chol(cost.R);
  return sys.B * r_chol.solve(sys.B.transpose()) -
         (1.0 / lambda) * (sys.Xi * sys.Xi.transpose());
}

Eigen::MatrixXd lqg_gain_matrix(const LinearSystem& sys, const CostSpec& cost) {
  Eigen::LLT<Eigen::MatrixXd> r_chol(cost.R);
  return sys.B * r_chol.solve(sys.B.transpose());
}

double penalty_margin_at(const LinearSystem& sys, const Eigen::MatrixXd& P,
                         double lambda) {
  return lambda -
         numeric::max_eigenvalue(sys.Xi.transpose() * P * sys.Xi);
}

// One P-only backward step P <- Q + A'(I + P phi)^{-1} P A.
Eigen::MatrixXd p_step(const Eigen::MatrixXd& P, const LinearSystem& sys,
                       const CostSpec& cost, const Eigen::MatrixXd& phi) {
  const int n = sys.n();
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(
      Eigen::MatrixXd::Identity(n, n) + P * phi);
  if (lu.rcond() < 1e-12)
    throw SolverError(ErrorCode::SingularMatrix,
                      "I + P Phi is numerically singular");
  return numeric::symmetrize(cost.Q + sys.A.transpose() * lu.solve(P * sys.A));
}

// Iterates the P recursion until the fixed point, keeping the penalty
// condition at every iterate.
Eigen::MatrixXd riccati_iterate(const LinearSystem& sys, const CostSpec& cost,
                                double lambda, Eigen::MatrixXd P, int max_iter,
                                double tol) {
  const Eigen::MatrixXd phi = make_phi(sys, cost, lambda);
  for (int it = 0; it < max_iter; ++it) {
    if (penalty_margin_at(sys, P, lambda) <= numeric::kPdTol * (1.0 + lambda))
      throw SolverError(ErrorCode::PenaltyTooSmall,
                        "penalty margin lost at iterate " + std::to_string(it),
                        it);
    Eigen::MatrixXd next = p_step(P, sys, cost, phi);
    const double gap = (next - P).norm();
    P = std::move(next);
    if (gap <= tol * (1.0 + P.norm())) {
      if (penalty_margin_at(sys, P, lambda) <=
          numeric::kPdTol * (1.0 + lambda))
        throw SolverError(ErrorCode::PenaltyTooSmall,
                          "penalty margin lost at the fixed point");
      return P;
    }
  }
  throw SolverError(ErrorCode::NoConvergence,
                    "Riccati iteration did not converge in " +
                        std::to_string(max_iter) + " iterations");
}

// Builds the full steady solution (r, rho, policy, certificates) from a
// converged P.  `phi` distinguishes the penalized and LQG variants.
SteadySolution finalize_steady(Eigen::MatrixXd P, const LinearSystem& sys,
                               const CostSpec& cost,
                               const EmpiricalDistribution& emp, double lambda,
                               const Eigen::MatrixXd& phi, bool lqg,
                               Method method) {
  const int n = sys.n();
  SteadySolution sol;
  sol.method = method;
  sol.lambda = lambda;
  sol.P = std::move(P);

  if (numeric::min_eigenvalue(sol.P) < -1e-8 * (1.0 + sol.P.norm()))
    throw SolverError(ErrorCode::NoConvergence,
                      "steady-state P is not positive semidefinite");

  sol.penalty_margin =
      lqg ? std::numeric_limits<double>::infinity()
          : penalty_margin_at(sys, sol.P, lambda);
  if (!lqg && sol.penalty_margin <= numeric::kPdTol * (1.0 + lambda))
    throw SolverError(ErrorCode::PenaltyTooSmall,
                      "penalty margin is not positive at the solution");

  const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n) + sol.P * phi;
  Eigen::PartialPivLU<Eigen::MatrixXd> m_lu(m);
  sol.are_residual =
      (sol.P - cost.Q - sys.A.transpose() * m_lu.solve(sol.P * sys.A)).norm();
  if (sol.are_residual > kAreResidualTol * (1.0 + sol.P.norm()))
    throw SolverError(ErrorCode::NoConvergence,
                      "ARE residual " + std::to_string(sol.are_residual) +
                          " exceeds tolerance");

  // r_ss = [I - A'(I+P phi)^{-1}]^{-1} A'(I+P phi)^{-1} P Xi wbar, via
  // (M - A') y = rhs-with-M-substitution, r = M y.
  const Eigen::VectorXd rhs =
      sys.A.transpose() * m_lu.solve(sol.P * (sys.Xi * emp.mean));
  const Eigen::VectorXd y =
      (m - sys.A.transpose()).partialPivLu().solve(rhs);
  sol.r = m * y;

  Eigen::LLT<Eigen::MatrixXd> r_chol(cost.R);
  sol.K = -r_chol.solve(sys.B.transpose() * m_lu.solve(sol.P * sys.A));
  sol.L = -r_chol.solve(sys.B.transpose() *
                        m_lu.solve(sol.P * (sys.Xi * emp.mean) + sol.r));

  sol.rho = lqg ? finite_horizon::detail::lqg_z_increment(sol.P, sol.r, sys,
                                                          cost, emp)
                : finite_horizon::detail::z_increment(sol.P, sol.r, sys, cost,
                                                      emp, lambda);

  sol.closed_loop_spectral_radius =
      numeric::spectral_radius(sys.A + sys.B * sol.K);
  const Eigen::MatrixXd mean_gain =
      (Eigen::MatrixXd::Identity(n, n) + phi * sol.P)
          .partialPivLu()
          .solve(sys.A);
  sol.mean_state_gain_radius = numeric::spectral_radius(mean_gain);
  if (sol.closed_loop_spectral_radius >= 1.0 ||
      sol.mean_state_gain_radius >= 1.0)
    throw SolverError(ErrorCode::AssumptionViolated,
                      "converged solution is not stabilizing (radii " +
                          std::to_string(sol.closed_loop_spectral_radius) +
                          ", " + std::to_string(sol.mean_state_gain_radius) +
                          ")");
  return sol;
}

void require_assumptions(const LinearSystem& sys, const CostSpec& cost,
                         double lambda) {
  const AssumptionCertificate cert = check_assumptions(sys, cost, lambda);
  if (!cert.ok()) {
    std::string what = "assumption check failed:";
    if (!cert.phi_psd)
      what += " Phi has negative eigenvalue " +
              std::to_string(cert.phi_min_eig) + ";";
    if (!cert.stabilizable) what += " (A, Phi^{1/2}) not stabilizable;";
    if (!cert.observable) what += " (A, Q^{1/2}) not observable;";
    throw SolverError(ErrorCode::AssumptionViolated, what);
  }
}

}  // namespace

AssumptionCertificate check_assumptions(const LinearSystem& sys,
                                        const CostSpec& cost, double lambda) {
  if (lambda <= 0.0)
    throw SolverError(ErrorCode::PenaltyTooSmall,
                      "lambda must be positive to form Phi");
  AssumptionCertificate cert;
  const Eigen::MatrixXd phi = make_phi(sys, cost, lambda);
  cert.phi_min_eig = numeric::min_eigenvalue(phi);
  cert.phi_psd = cert.phi_min_eig >= -numeric::kSymTol * (1.0 + phi.norm());
  cert.stabilizable = numeric::is_stabilizable(sys.A, numeric::psd_sqrt(phi));
  cert.observable = numeric::is_observable(
      sys.A, numeric::psd_sqrt(cost.Q).transpose());
  cert.penalty_margin = penalty_margin_at(sys, cost.Qf, lambda);
  return cert;
}

SteadySolution solve_are_fixed_point(
    const LinearSystem& sys, const CostSpec& cost,
    const EmpiricalDistribution& emp, double lambda, int max_iter, double tol,
    const std::optional<Eigen::MatrixXd>& initial) {
  require_assumptions(sys, cost, lambda);
  const Eigen::MatrixXd start = initial.value_or(cost.Qf);
  const Eigen::MatrixXd P =
      riccati_iterate(sys, cost, lambda, start, max_iter, tol);
  return finalize_steady(P, sys, cost, emp, lambda,
                         make_phi(sys, cost, lambda), /*lqg=*/false,
                         Method::FixedPoint);
}

SteadySolution solve_are_eigen(const LinearSystem& sys, const CostSpec& cost,
                               const EmpiricalDistribution& emp,
                               double lambda) {
  require_assumptions(sys, cost, lambda);
  const int n = sys.n();
  if (numeric::condition_number(sys.A) > 1e10)
    throw SolverError(ErrorCode::SingularA,
                      "A is numerically singular; use the fixed-point solver");

  const Eigen::MatrixXd phi = make_phi(sys, cost, lambda);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_at(sys.A.transpose());
  const Eigen::MatrixXd a_inv_t_q = lu_at.solve(cost.Q);
  const Eigen::MatrixXd a_inv_t =
      lu_at.solve(Eigen::MatrixXd::Identity(n, n));

  Eigen::MatrixXd h(2 * n, 2 * n);
  h.topLeftCorner(n, n) = sys.A + phi * a_inv_t_q;
  h.topRightCorner(n, n) = -phi * a_inv_t;
  h.bottomLeftCorner(n, n) = -a_inv_t_q;
  h.bottomRightCorner(n, n) = a_inv_t;

  Eigen::EigenSolver<Eigen::MatrixXd> es(h);
  if (es.info() != Eigen::Success)
    throw SolverError(ErrorCode::NoConvergence, "eigendecomposition failed");

  std::vector<int> stable;
  for (int i = 0; i < 2 * n; ++i)
    if (std::abs(es.eigenvalues()(i)) < 1.0) stable.push_back(i);
  if (static_cast<int>(stable.size()) != n)
    throw SolverError(
        ErrorCode::UnstableSubspaceDefect,
        "expected " + std::to_string(n) + " stable eigenvalues, found " +
            std::to_string(stable.size()));

  Eigen::MatrixXcd u1(n, n), u2(n, n);
  for (int c = 0; c < n; ++c) {
    u1.col(c) = es.eigenvectors().col(stable[static_cast<size_t>(c)]).head(n);
    u2.col(c) = es.eigenvectors().col(stable[static_cast<size_t>(c)]).tail(n);
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> u1_svd(u1);
  const double u1_smin = u1_svd.singularValues().minCoeff();
  const double u1_smax = u1_svd.singularValues().maxCoeff();
  if (u1_smin <= 0.0 || u1_smax / u1_smin > 1e12)
    throw SolverError(ErrorCode::IllConditionedU1,
                      "stable-subspace basis U1 is ill conditioned");

  Eigen::PartialPivLU<Eigen::MatrixXcd> u1_lu(u1);
  const Eigen::MatrixXcd p_complex =
      u2 * u1_lu.solve(Eigen::MatrixXcd::Identity(n, n));
  const double imag_norm = p_complex.imag().norm();
  const Eigen::MatrixXd p_real = p_complex.real();
  if (imag_norm > 1e-8 * (1.0 + p_real.norm()))
    throw SolverError(ErrorCode::IllConditionedU1,
                      "imaginary residue " + std::to_string(imag_norm) +
                          " in U2 U1^{-1}");

  return finalize_steady(numeric::symmetrize(p_real), sys, cost, emp, lambda,
                         phi, /*lqg=*/false, Method::Eigen);
}

SteadySolution solve_are(const LinearSystem& sys, const CostSpec& cost,
                         const EmpiricalDistribution& emp, double lambda) {
  SteadySolution fixed = solve_are_fixed_point(sys, cost, emp, lambda);
  try {
    const SteadySolution eig = solve_are_eigen(sys, cost, emp, lambda);
    if ((eig.P - fixed.P).norm() <= 1e-6 * (1.0 + fixed.P.norm())) {
      fixed.method = Method::Both;
    }
  } catch (const SolverError&) {
    // Fixed point stands alone (singular A or subspace trouble).
  }
  return fixed;
}

SteadySolution lqg_steady(const LinearSystem& sys, const CostSpec& cost,
                          const EmpiricalDistribution& emp) {
  const Eigen::MatrixXd g = lqg_gain_matrix(sys, cost);
  Eigen::MatrixXd P = cost.Qf;
  const int max_iter = 100000;
  const double tol = 1e-12;
  bool converged = false;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::MatrixXd next = p_step(P, sys, cost, g);
    const double gap = (next - P).norm();
    P = std::move(next);
    if (gap <= tol * (1.0 + P.norm())) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw SolverError(ErrorCode::NoConvergence,
                      "LQG Riccati iteration did not converge");
  return finalize_steady(P, sys, cost, emp, 0.0, g, /*lqg=*/true, Method::Lqg);
}

DiscreteDistribution steady_worst_case_distribution(
    const Eigen::VectorXd& x, const SteadySolution& sol,
    const LinearSystem& sys, const EmpiricalDistribution& emp) {
  const double lambda = sol.lambda;
  const Eigen::MatrixXd xi_p_xi =
      numeric::symmetrize(sys.Xi.transpose() * sol.P * sys.Xi);
  const double margin = lambda - numeric::max_eigenvalue(xi_p_xi);
  if (margin <= numeric::kPdTol * (1.0 + lambda))
    throw SolverError(ErrorCode::PenaltyTooSmall,
                      "penalty margin is not positive");
  const Eigen::MatrixXd d =
      lambda * Eigen::MatrixXd::Identity(sys.k(), sys.k()) - xi_p_xi;
  Eigen::LDLT<Eigen::MatrixXd> d_ldlt(d);
  const Eigen::VectorXd mean_next =
      sol.P * ((sys.A + sys.B * sol.K) * x + sys.B * sol.L) + sol.r;
  Eigen::MatrixXd support(sys.k(), emp.count());
  for (int i = 0; i < emp.count(); ++i)
    support.col(i) = d_ldlt.solve(sys.Xi.transpose() * mean_next +
                                  lambda * emp.support.col(i));
  return DiscreteDistribution::uniform(std::move(support));
}

double bellman_residual(const SteadySolution& sol, const LinearSystem& sys,
                        const CostSpec& cost, const EmpiricalDistribution& emp,
                        double lambda, const std::vector<Eigen::VectorXd>& xs) {
  auto h = [&](const Eigen::VectorXd& x) {
    return x.dot(sol.P * x) + 2.0 * sol.r.dot(x);
  };
  double worst = 0.0;
  for (const Eigen::VectorXd& x : xs) {
    const Eigen::VectorXd u = sol.K * x + sol.L;
    const DiscreteDistribution wc =
        steady_worst_case_distribution(x, sol, sys, emp);
    double inner = u.dot(cost.R * u);
    for (int i = 0; i < wc.count(); ++i) {
      const Eigen::VectorXd w = wc.support.col(i);
      inner += (h(sys.A * x + sys.B * u + sys.Xi * w) -
                lambda * (emp.support.col(i) - w).squaredNorm()) /
               emp.count();
    }
    const double lhs = sol.rho + h(x);
    const double rhs = x.dot(cost.Q * x) + inner;
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

StabilityCertificates stability_certificates(const SteadySolution& sol,
                                             const LinearSystem& sys,
                                             const CostSpec& cost,
                                             const EmpiricalDistribution& emp) {
  const int n = sys.n();
  const Eigen::MatrixXd phi = sol.method == Method::Lqg
                                  ? lqg_gain_matrix(sys, cost)
                                  : make_phi(sys, cost, sol.lambda);
  StabilityCertificates cert;
  cert.closed_loop_radius = numeric::spectral_radius(sys.A + sys.B * sol.K);
  const Eigen::MatrixXd n_mat =
      Eigen::MatrixXd::Identity(n, n) + phi * sol.P;
  cert.mean_gain_radius =
      numeric::spectral_radius(n_mat.partialPivLu().solve(sys.A));

  // Limit of x_{t+1} = (I+Phi P)^{-1} A x_t + (I - Phi (I+P Phi - A')^{-1} P) Xi wbar.
  const Eigen::VectorXd xi_wbar = sys.Xi * emp.mean;
  const Eigen::VectorXd s =
      (Eigen::MatrixXd::Identity(n, n) + sol.P * phi - sys.A.transpose())
          .partialPivLu()
          .solve(sol.P * xi_wbar);
  const Eigen::VectorXd b = xi_wbar - phi * s;
  cert.mean_state_limit = (n_mat - sys.A).partialPivLu().solve(n_mat * b);
  return cert;
}

bool penalty_margin_holds_along_iteration(const LinearSystem& sys,
                                          const CostSpec& cost, double lambda,
                                          int max_iter, double tol) {
  if (lambda <= 0.0) return false;
  const Eigen::MatrixXd phi = make_phi(sys, cost, lambda);
  Eigen::MatrixXd P = cost.Qf;
  for (int it = 0; it < max_iter; ++it) {
    if (penalty_margin_at(sys, P, lambda) <= numeric::kPdTol * (1.0 + lambda))
      return false;
    Eigen::MatrixXd next;
    try {
      next = p_step(P, sys, cost, phi);
    } catch (const SolverError&) {
      return false;
    }
    if (!next.allFinite()) return false;
    const double gap = (next - P).norm();
    P = std::move(next);
    if (gap <= tol * (1.0 + P.norm()))
      return penalty_margin_at(sys, P, lambda) >
             numeric::kPdTol * (1.0 + lambda);
  }
  // Margins held for the whole budget without convergence; the iterate
  // family satisfied the condition as far as it was computed.
  return true;
}

double hinf_attenuation_level(const LinearSystem& sys, const CostSpec& cost,
                              double tol) {
  if (!numeric::is_stabilizable(sys.A, sys.B))
    throw SolverError(ErrorCode::AssumptionViolated, "(A, B) not stabilizable");
  if (!numeric::is_observable(sys.A, numeric::psd_sqrt(cost.Q).transpose()))
    throw SolverError(ErrorCode::AssumptionViolated,
                      "(A, Q^{1/2}) not observable");

  const EmpiricalDistribution zero_atom =
      EmpiricalDistribution::from_samples(Eigen::MatrixXd::Zero(sys.k(), 1));
  auto passes = [&](double lambda) {
    try {
      solve_are_fixed_point(sys, cost, zero_atom, lambda);
      return true;
    } catch (const SolverError&) {
      return false;
    }
  };
  return detail::bisect_threshold(passes, tol, 1e12, tol,
                                  ErrorCode::NoFiniteLevel,
                                  "no lambda up to 1e12 admits a solution");
}

}  // namespace wlqc::infinite_horizon
