#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wlqc/errors.hpp"

namespace wlqc {

// Plant x_{t+1} = A x_t + B u_t + Xi w_t with x in R^n, u in R^m, w in R^k.
struct LinearSystem {
  Eigen::MatrixXd A;   // n x n
  Eigen::MatrixXd B;   // n x m
  Eigen::MatrixXd Xi;  // n x k

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
  int k() const { return static_cast<int>(Xi.cols()); }

  // Throws DimensionMismatch on inconsistent shapes or non-finite entries.
  static LinearSystem make(Eigen::MatrixXd A, Eigen::MatrixXd B,
                           Eigen::MatrixXd Xi);
};

// Quadratic stage/terminal cost with horizon and penalty parameter.
// horizon == kInfiniteHorizon selects the average-cost setting.
struct CostSpec {
  Eigen::MatrixXd Q;   // n x n, symmetric PSD
  Eigen::MatrixXd R;   // m x m, symmetric PD
  Eigen::MatrixXd Qf;  // n x n, symmetric PSD
  int horizon = 1;
  double lambda = 0.0;

  static constexpr int kInfiniteHorizon = 0;
  bool infinite() const { return horizon == kInfiniteHorizon; }

  // Symmetrizes Q, R, Qf on ingestion and checks definiteness margins.
  static CostSpec make(Eigen::MatrixXd Q, Eigen::MatrixXd R,
                       Eigen::MatrixXd Qf, int horizon, double lambda = 0.0);
};

// Uniform empirical distribution on N support points, with cached mean and
// raw (uncentered) second moment Sigma = (1/N) sum_i w_i w_i'.
struct EmpiricalDistribution {
  Eigen::MatrixXd support;        // k x N, one column per sample
  Eigen::VectorXd mean;           // k
  Eigen::MatrixXd second_moment;  // k x k

  int dim() const { return static_cast<int>(support.rows()); }
  int count() const { return static_cast<int>(support.cols()); }

  static EmpiricalDistribution from_samples(Eigen::MatrixXd support);
};

// Finitely supported distribution with arbitrary nonnegative weights.
struct DiscreteDistribution {
  Eigen::MatrixXd support;  // k x M
  Eigen::VectorXd weights;  // M, sums to 1

  int dim() const { return static_cast<int>(support.rows()); }
  int count() const { return static_cast<int>(support.cols()); }

  static DiscreteDistribution uniform(Eigen::MatrixXd support);
  static DiscreteDistribution make(Eigen::MatrixXd support,
                                   Eigen::VectorXd weights);
};

DiscreteDistribution to_discrete(const EmpiricalDistribution& emp);

// Control law u = K x + L.
struct AffinePolicy {
  Eigen::MatrixXd K;  // m x n
  Eigen::VectorXd L;  // m
};

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> findings;

  void flag(std::string finding) {
    ok = false;
    findings.push_back(std::move(finding));
  }
};

// Non-throwing consistency check: dimensions, symmetry/definiteness margins,
// sample dimension vs k, cached-moment consistency.
ValidationReport validate_problem(const LinearSystem& sys, const CostSpec& cost,
                                  const EmpiricalDistribution& emp);

// x'Qx + u'Ru.
double stage_cost(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                  const CostSpec& cost);

// x'Qf x.
double terminal_cost(const Eigen::VectorXd& x, const CostSpec& cost);

// x'Qx + u'Ru - lambda * W2(mu, emp)^2, with the exact transport distance.
double penalized_stage_cost(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                            const DiscreteDistribution& mu,
                            const EmpiricalDistribution& emp, double lambda,
                            const CostSpec& cost);

}  // namespace wlqc
