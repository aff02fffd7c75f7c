#include "wlqc/model.hpp"

#include <cmath>
#include <sstream>

#include "wlqc/numeric.hpp"
#include "wlqc/robustness.hpp"

namespace wlqc {

LinearSystem LinearSystem::make(Eigen::MatrixXd A, Eigen::MatrixXd B,
                                Eigen::MatrixXd Xi) {
  if (A.rows() != A.cols())
    throw SolverError(ErrorCode::DimensionMismatch, "A must be square");
  if (B.rows() != A.rows())
    throw SolverError(ErrorCode::DimensionMismatch, "B must have n rows");
  if (Xi.rows() != A.rows())
    throw SolverError(ErrorCode::DimensionMismatch, "Xi must have n rows");
  if (!numeric::all_finite(A) || !numeric::all_finite(B) ||
      !numeric::all_finite(Xi))
    throw SolverError(ErrorCode::DimensionMismatch,
                      "system matrices must be finite");
  return LinearSystem{std::move(A), std::move(B), std::move(Xi)};
}

CostSpec CostSpec::make(Eigen::MatrixXd Q, Eigen::MatrixXd R,
                        Eigen::MatrixXd Qf, int horizon, double lambda) {
  if (Q.rows() != Q.cols() || R.rows() != R.cols() || Qf.rows() != Qf.cols() ||
      Qf.rows() != Q.rows())
    throw SolverError(ErrorCode::DimensionMismatch,
                      "Q, R, Qf must be square with matching state dimension");
  if (horizon < 0)
    throw SolverError(ErrorCode::DimensionMismatch,
                      "horizon must be positive or kInfiniteHorizon");
  if (lambda < 0.0)
    throw SolverError(ErrorCode::DimensionMismatch, "lambda must be >= 0");
  CostSpec cost;
  cost.Q = numeric::symmetrize(Q);
  cost.R = numeric::symmetrize(R);
  cost.Qf = numeric::symmetrize(Qf);
  cost.horizon = horizon;
  cost.lambda = lambda;
  const double q_scale = 1.0 + cost.Q.norm();
  if (numeric::min_eigenvalue(cost.Q) < -numeric::kSymTol * q_scale)
    throw SolverError(ErrorCode::DimensionMismatch, "Q is not PSD");
  if (numeric::min_eigenvalue(cost.Qf) < -numeric::kSymTol * (1.0 + cost.Qf.norm()))
    throw SolverError(ErrorCode::DimensionMismatch, "Qf is not PSD");
  if (numeric::min_eigenvalue(cost.R) <= 0.0)
    throw SolverError(ErrorCode::DimensionMismatch, "R is not PD");
  return cost;
}

EmpiricalDistribution EmpiricalDistribution::from_samples(
    Eigen::MatrixXd support) {
  if (support.cols() < 1)
    throw SolverError(ErrorCode::DimensionMismatch,
                      "empirical distribution needs at least one sample");
  if (!numeric::all_finite(support))
    throw SolverError(ErrorCode::DimensionMismatch, "samples must be finite");
  EmpiricalDistribution emp;
  emp.mean = support.rowwise().mean();
  emp.second_moment =
      (support * support.transpose()) / static_cast<double>(support.cols());
  emp.support = std::move(support);
  return emp;
}

DiscreteDistribution DiscreteDistribution::uniform(Eigen::MatrixXd support) {
  const int count = static_cast<int>(support.cols());
  return make(std::move(support),
              Eigen::VectorXd::Constant(count, 1.0 / count));
}

DiscreteDistribution DiscreteDistribution::make(Eigen::MatrixXd support,
                                                Eigen::VectorXd weights) {
  if (support.cols() != weights.size() || support.cols() < 1)
    throw SolverError(ErrorCode::DimensionMismatch,
                      "support/weight count mismatch");
  if (!numeric::all_finite(support) || !weights.allFinite())
    throw SolverError(ErrorCode::DimensionMismatch,
                      "distribution entries must be finite");
  if (weights.minCoeff() < -1e-12 || std::abs(weights.sum() - 1.0) > 1e-9)
    throw SolverError(ErrorCode::DimensionMismatch,
                      "weights must be nonnegative and sum to 1");
  return DiscreteDistribution{std::move(support), std::move(weights)};
}

DiscreteDistribution to_discrete(const EmpiricalDistribution& emp) {
  return DiscreteDistribution::uniform(emp.support);
}

ValidationReport validate_problem(const LinearSystem& sys, const CostSpec& cost,
                                  const EmpiricalDistribution& emp) {
  ValidationReport report;
  auto shape = [](const Eigen::MatrixXd& m) {
    std::ostringstream os;
    os << m.rows() << "x" << m.cols();
    return os.str();
  };

  if (sys.A.rows() != sys.A.cols()) report.flag("A is not square");
  if (sys.B.rows() != sys.n())
    report.flag("B has " + std::to_string(sys.B.rows()) + " rows, expected " +
                std::to_string(sys.n()));
  if (sys.Xi.rows() != sys.n())
    report.flag("Xi has " + std::to_string(sys.Xi.rows()) +
                " rows, expected " + std::to_string(sys.n()));
  if (!numeric::all_finite(sys.A) || !numeric::all_finite(sys.B) ||
      !numeric::all_finite(sys.Xi))
    report.flag("system matrices contain non-finite entries");

  if (cost.Q.rows() != sys.n() || cost.Q.cols() != sys.n())
    report.flag("Q is " + shape(cost.Q) + ", expected " +
                std::to_string(sys.n()) + "x" + std::to_string(sys.n()));
  if (cost.R.rows() != sys.m() || cost.R.cols() != sys.m())
    report.flag("R is " + shape(cost.R) + ", expected " +
                std::to_string(sys.m()) + "x" + std::to_string(sys.m()));
  if (cost.Qf.rows() != sys.n() || cost.Qf.cols() != sys.n())
    report.flag("Qf is " + shape(cost.Qf));

  auto check_sym = [&](const Eigen::MatrixXd& m, const std::string& name) {
    if (m.rows() != m.cols()) return;
    const double asym = (m - m.transpose()).norm();
    if (asym > numeric::kSymTol * (1.0 + m.norm()))
      report.flag(name + " not symmetric (asymmetry " + std::to_string(asym) +
                  ")");
  };
  check_sym(cost.Q, "Q");
  check_sym(cost.R, "R");
  check_sym(cost.Qf, "Qf");

  if (cost.Q.rows() == cost.Q.cols()) {
    const double e = numeric::min_eigenvalue(cost.Q);
    if (e < -numeric::kSymTol * (1.0 + cost.Q.norm()))
      report.flag("Q not PSD (min eigenvalue " + std::to_string(e) + ")");
  }
  if (cost.Qf.rows() == cost.Qf.cols()) {
    const double e = numeric::min_eigenvalue(cost.Qf);
    if (e < -numeric::kSymTol * (1.0 + cost.Qf.norm()))
      report.flag("Qf not PSD (min eigenvalue " + std::to_string(e) + ")");
  }
  if (cost.R.rows() == cost.R.cols() && cost.R.rows() > 0) {
    const double e = numeric::min_eigenvalue(cost.R);
    if (e <= 0.0)
      report.flag("R not PD (min eigenvalue " + std::to_string(e) + ")");
  }

  if (emp.dim() != sys.k())
    report.flag("samples live in R^" + std::to_string(emp.dim()) +
                " but Xi has " + std::to_string(sys.k()) + " columns");
  if (emp.count() < 1) report.flag("empirical distribution is empty");

  // Cached moments must match recomputation from the support.
  const Eigen::VectorXd mean = emp.support.rowwise().mean();
  const Eigen::MatrixXd second =
      (emp.support * emp.support.transpose()) / emp.count();
  if ((mean - emp.mean).norm() > 1e-12 * (1.0 + mean.norm()))
    report.flag("cached mean is stale");
  if ((second - emp.second_moment).norm() > 1e-12 * (1.0 + second.norm()))
    report.flag("cached second moment is stale");

  if (cost.lambda < 0.0) report.flag("lambda must be nonnegative");
  if (cost.horizon < 0) report.flag("horizon must be positive or infinite");

  return report;
}

double stage_cost(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                  const CostSpec& cost) {
  if (x.size() != cost.Q.rows() || u.size() != cost.R.rows())
    throw SolverError(ErrorCode::DimensionMismatch,
                      "stage_cost dimension mismatch");
  return x.dot(cost.Q * x) + u.dot(cost.R * u);
}

double terminal_cost(const Eigen::VectorXd& x, const CostSpec& cost) {
  if (x.size() != cost.Qf.rows())
    throw SolverError(ErrorCode::DimensionMismatch,
                      "terminal_cost dimension mismatch");
  return x.dot(cost.Qf * x);
}

double penalized_stage_cost(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                            const DiscreteDistribution& mu,
                            const EmpiricalDistribution& emp, double lambda,
                            const CostSpec& cost) {
  const double w2 = robustness::wasserstein2(mu, to_discrete(emp));
  return stage_cost(x, u, cost) - lambda * w2 * w2;
}

}  // namespace wlqc
