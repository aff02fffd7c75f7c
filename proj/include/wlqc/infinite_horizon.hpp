#pragma once

#include <optional>
#include <vector>

#include "wlqc/model.hpp"

namespace wlqc::infinite_horizon {

enum class Method { FixedPoint, Eigen, Both, Lqg };

struct SteadySolution {
  Eigen::MatrixXd P;  // stabilizing PSD solution of the Riccati fixed point
  Eigen::VectorXd r;  // affine value offset
  double rho = 0.0;   // stationary average cost
  Eigen::MatrixXd K;
  Eigen::VectorXd L;
  double lambda = 0.0;
  double penalty_margin = 0.0;  // lambda - max eig(Xi' P Xi)
  double are_residual = 0.0;    // ||P - Q - A'(I+P Phi)^{-1}P A||_F
  double closed_loop_spectral_radius = 0.0;  // rho(A + B K)
  double mean_state_gain_radius = 0.0;       // rho((I + Phi P)^{-1} A)
  Method method = Method::FixedPoint;
};

struct AssumptionCertificate {
  double phi_min_eig = 0.0;
  bool phi_psd = false;
  bool stabilizable = false;  // (A, Phi^{1/2})
  bool observable = false;    // (A, Q^{1/2})
  // lambda - max eig(Xi' Qf Xi): margin at the recursion's starting value.
  double penalty_margin = 0.0;

  bool ok() const { return phi_psd && stabilizable && observable; }
};

// Computes Phi and runs the stabilizability/observability tests.
// Stabilizability uses a PBH rank test over the unstable eigenvalues of A
// (the Kalman rank test would misreport stabilizable-but-uncontrollable
// pairs); observability uses the Kalman matrix rank with SVD threshold.
AssumptionCertificate check_assumptions(const LinearSystem& sys,
                                        const CostSpec& cost, double lambda);

// Fixed-point Riccati iteration started from P = Qf (or `initial`), with the
// penalty condition checked at every iterate.  Converges when
// ||P_next - P||_F <= tol (1 + ||P_next||_F).
SteadySolution solve_are_fixed_point(
    const LinearSystem& sys, const CostSpec& cost,
    const EmpiricalDistribution& emp, double lambda, int max_iter = 100000,
    double tol = 1e-12,
    const std::optional<Eigen::MatrixXd>& initial = std::nullopt);

// Stable-subspace method for nonsingular A: eigenvectors of
//   H = [[A + Phi A^{-T} Q, -Phi A^{-T}], [-A^{-T} Q, A^{-T}]]
// with |eigenvalue| < 1 stacked as [U1; U2] give P = Re(U2 U1^{-1}).
SteadySolution solve_are_eigen(const LinearSystem& sys, const CostSpec& cost,
                               const EmpiricalDistribution& emp,
                               double lambda);

// Fixed-point primary, eigen cross-check when A is nonsingular; method is
// Both when the two agree to 1e-6 relative.
SteadySolution solve_are(const LinearSystem& sys, const CostSpec& cost,
                         const EmpiricalDistribution& emp, double lambda);

// Steady-state LQG solution; rho is the LQG average cost (the lambda -> inf
// limit of the penalized stationary cost).
SteadySolution lqg_steady(const LinearSystem& sys, const CostSpec& cost,
                          const EmpiricalDistribution& emp);

DiscreteDistribution steady_worst_case_distribution(
    const Eigen::VectorXd& x, const SteadySolution& sol,
    const LinearSystem& sys, const EmpiricalDistribution& emp);

// Max over xs of |rho + h(x) - (x'Qx + saddle stage value at x)| with
// h(x) = x'Px + 2r'x.
double bellman_residual(const SteadySolution& sol, const LinearSystem& sys,
                        const CostSpec& cost, const EmpiricalDistribution& emp,
                        double lambda, const std::vector<Eigen::VectorXd>& xs);

struct StabilityCertificates {
  double closed_loop_radius = 0.0;  // rho(A + B K)
  double mean_gain_radius = 0.0;    // rho((I + Phi P)^{-1} A)
  Eigen::VectorXd mean_state_limit;
};

// Spectral radii plus the fixed point of the mean-state dynamics
//   [I - (I+Phi P)^{-1}A]^{-1} [I - Phi (I + P Phi - A')^{-1} P] Xi wbar.
StabilityCertificates stability_certificates(const SteadySolution& sol,
                                             const LinearSystem& sys,
                                             const CostSpec& cost,
                                             const EmpiricalDistribution& emp);

// Smallest lambda (within tol) for which the fixed-point solve succeeds with
// a positive penalty margin; this is the attainable disturbance attenuation
// bound ||T||_inf <= lambda of the closed loop.
double hinf_attenuation_level(const LinearSystem& sys, const CostSpec& cost,
                              double tol);

// True when lambda I - Xi'P_t Xi stays PD along the whole fixed-point
// iteration (the "for all iterates" reading of the infinite-horizon penalty
// threshold).  Tracks margins only; no other assumption is consulted.
bool penalty_margin_holds_along_iteration(const LinearSystem& sys,
                                          const CostSpec& cost, double lambda,
                                          int max_iter = 100000,
                                          double tol = 1e-12);

}  // namespace wlqc::infinite_horizon
