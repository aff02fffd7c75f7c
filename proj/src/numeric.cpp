#include "wlqc/numeric.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace wlqc::numeric {

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

double min_eigenvalue(const Eigen::MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(sym),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double max_eigenvalue(const Eigen::MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(sym),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double spectral_radius(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double condition_number(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return smax / smin;
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& sym, double clip) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(sym));
  Eigen::VectorXd d = es.eigenvalues();
  for (int i = 0; i < d.size(); ++i) d(i) = d(i) > clip ? std::sqrt(d(i)) : 0.0;
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

int svd_rank(const Eigen::MatrixXd& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const Eigen::VectorXd& s = svd.singularValues();
  const double thresh = rel_tol * s.maxCoeff();
  int rank = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > thresh) ++rank;
  return rank;
}

Eigen::MatrixXd expm(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);

  // Scale so the 1-norm is at most 0.5, apply the Pade(6,6) approximant,
  // then undo the scaling by repeated squaring.
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > 0.5) {
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
  }
  const Eigen::MatrixXd as = a / std::ldexp(1.0, squarings);

  // Pade(6,6) coefficients of exp: c_j = 6!/(12)! * ... (classic values).
  static const double c[7] = {1.0,        1.0 / 2.0,   5.0 / 44.0, 1.0 / 66.0,
                              1.0 / 792.0, 1.0 / 15840.0, 1.0 / 665280.0};
  const Eigen::MatrixXd a2 = as * as;
  const Eigen::MatrixXd a4 = a2 * a2;
  const Eigen::MatrixXd a6 = a4 * a2;
  const Eigen::MatrixXd even = c[0] * eye + c[2] * a2 + c[4] * a4 + c[6] * a6;
  const Eigen::MatrixXd odd = as * (c[1] * eye + c[3] * a2 + c[5] * a4);
  Eigen::MatrixXd p = (even - odd).partialPivLu().solve(even + odd);
  for (int i = 0; i < squarings; ++i) p = p * p;
  return p;
}

namespace {

bool pbh_rank_full(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                   std::complex<double> z, double rel_tol) {
  const int n = static_cast<int>(a.rows());
  Eigen::MatrixXcd pencil(n, n + b.cols());
  pencil.leftCols(n) =
      z * Eigen::MatrixXcd::Identity(n, n) - a.cast<std::complex<double>>();
  pencil.rightCols(b.cols()) = b.cast<std::complex<double>>();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pencil);
  const Eigen::VectorXd& s = svd.singularValues();
  return s.minCoeff() > rel_tol * s.maxCoeff();
}

}  // namespace

bool is_stabilizable(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                     double rel_tol) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, /*computeEigenvectors=*/false);
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const std::complex<double> z = es.eigenvalues()(i);
    if (std::abs(z) >= 1.0 - rel_tol && !pbh_rank_full(a, b, z, rel_tol)) {
      return false;
    }
  }
  return true;
}

bool is_observable(const Eigen::MatrixXd& a, const Eigen::MatrixXd& c,
                   double rel_tol) {
  const int n = static_cast<int>(a.rows());
  Eigen::MatrixXd obs(n * c.rows(), n);
  Eigen::MatrixXd block = c;
  for (int i = 0; i < n; ++i) {
    obs.middleRows(i * c.rows(), c.rows()) = block;
    block = block * a;
  }
  return svd_rank(obs, rel_tol) == n;
}

double pairwise_sum(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  std::vector<double> level(xs);
  while (level.size() > 1) {
    std::vector<double> next((level.size() + 1) / 2);
    for (size_t i = 0; i + 1 < level.size(); i += 2)
      next[i / 2] = level[i] + level[i + 1];
    if (level.size() % 2 == 1) next.back() = level.back();
    level = std::move(next);
  }
  return level[0];
}

}  // namespace wlqc::numeric
