#pragma once

#include <vector>

#include <Eigen/Dense>

namespace wlqc::numeric {

// Relative symmetry tolerance used when ingesting cost/value matrices.
inline constexpr double kSymTol = 1e-9;

// Positive-definiteness margin for the penalty condition lambda*I - Xi'P*Xi > 0,
// enforced as min-eig > kPdTol * (1 + lambda).
inline constexpr double kPdTol = 1e-9;

inline Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

bool all_finite(const Eigen::MatrixXd& m);

// Eigenvalue extremes of a symmetric matrix (the input is symmetrized first).
double min_eigenvalue(const Eigen::MatrixXd& sym);
double max_eigenvalue(const Eigen::MatrixXd& sym);

// Spectral radius of a general square matrix.
double spectral_radius(const Eigen::MatrixXd& m);

// 2-norm condition number via SVD.
double condition_number(const Eigen::MatrixXd& m);

// Symmetric PSD square root; eigenvalues below `clip` are treated as zero.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& sym, double clip = 0.0);

// Numerical rank with threshold rel_tol * sigma_max.
int svd_rank(const Eigen::MatrixXd& m, double rel_tol = 1e-8);

// Matrix exponential by scaling-and-squaring with a order-6 diagonal Pade
// approximant; scaling threshold ||A||_1 <= 0.5.
Eigen::MatrixXd expm(const Eigen::MatrixXd& a);

// PBH test: (A, B) stabilizable iff rank [zI - A, B] = n for every
// eigenvalue z of A with |z| >= 1 (discrete time).
bool is_stabilizable(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                     double rel_tol = 1e-8);

// Kalman rank test on [C; CA; ...; CA^{n-1}].
bool is_observable(const Eigen::MatrixXd& a, const Eigen::MatrixXd& c,
                   double rel_tol = 1e-8);

// Order-independent pairwise summation.
double pairwise_sum(const std::vector<double>& xs);

}  // namespace wlqc::numeric
