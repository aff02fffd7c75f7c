#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "wlqc/model.hpp"
#include "wlqc/rng.hpp"
#include "wlqc/robustness.hpp"

using namespace wlqc;

namespace {

LinearSystem two_state_system() {
  Eigen::MatrixXd a(2, 2), b(2, 1), xi(2, 1);
  a << 0.9, 0.1, 0.0, 0.8;
  b << 0.0, 1.0;
  xi << 0.5, 0.2;
  return LinearSystem::make(a, b, xi);
}

}  // namespace

TEST_CASE("validate_problem passes a consistent two-state problem") {
  const LinearSystem sys = two_state_system();
  const CostSpec cost =
      CostSpec::make(Eigen::MatrixXd::Identity(2, 2),
                     Eigen::MatrixXd::Identity(1, 1),
                     Eigen::MatrixXd::Identity(2, 2), 5, 1.0);
  const auto emp =
      EmpiricalDistribution::from_samples(Eigen::MatrixXd::Random(1, 4));
  const ValidationReport report = validate_problem(sys, cost, emp);
  CHECK(report.ok);
  CHECK(report.findings.empty());
}

TEST_CASE("validate_problem flags R with a zero eigenvalue") {
  const LinearSystem sys = two_state_system();
  CostSpec cost;  // bypass the checked factory on purpose
  cost.Q = Eigen::MatrixXd::Identity(2, 2);
  cost.Qf = cost.Q;
  cost.R = Eigen::MatrixXd::Zero(1, 1);
  cost.horizon = 3;
  const auto emp =
      EmpiricalDistribution::from_samples(Eigen::MatrixXd::Zero(1, 1));
  const ValidationReport report = validate_problem(sys, cost, emp);
  CHECK_FALSE(report.ok);
  bool flagged = false;
  for (const auto& f : report.findings)
    if (f.find("R not PD") != std::string::npos) flagged = true;
  CHECK(flagged);
}

TEST_CASE("validate_problem flags sample dimension mismatch") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(2, 2);
  Eigen::MatrixXd b = Eigen::MatrixXd::Ones(2, 1);
  Eigen::MatrixXd xi = Eigen::MatrixXd::Ones(2, 3);  // disturbances in R^3
  const LinearSystem sys = LinearSystem::make(a, b, xi);
  const CostSpec cost =
      CostSpec::make(Eigen::MatrixXd::Identity(2, 2),
                     Eigen::MatrixXd::Identity(1, 1),
                     Eigen::MatrixXd::Identity(2, 2), 3);
  const auto emp =
      EmpiricalDistribution::from_samples(Eigen::MatrixXd::Random(2, 5));
  const ValidationReport report = validate_problem(sys, cost, emp);
  CHECK_FALSE(report.ok);
  bool flagged = false;
  for (const auto& f : report.findings)
    if (f.find("samples live in R^2") != std::string::npos) flagged = true;
  CHECK(flagged);
}

TEST_CASE("stage_cost basics") {
  const CostSpec cost = CostSpec::make(Eigen::MatrixXd::Identity(1, 1),
                                       2.0 * Eigen::MatrixXd::Identity(1, 1),
                                       Eigen::MatrixXd::Identity(1, 1), 1);
  SUBCASE("zero state and input") {
    CHECK(stage_cost(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1),
                     cost) == 0.0);
  }
  SUBCASE("scalar arithmetic: Q=1, R=2, x=3, u=1 gives 11") {
    Eigen::VectorXd x(1), u(1);
    x << 3.0;
    u << 1.0;
    CHECK(stage_cost(x, u, cost) == doctest::Approx(11.0).epsilon(1e-15));
  }
  SUBCASE("dimension mismatch throws") {
    CHECK_THROWS_AS(
        stage_cost(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(1), cost),
        SolverError);
  }
}

TEST_CASE("stage_cost agrees with elementwise summation") {
  Philox4x32 rng(11, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3, m = 2;
    Eigen::MatrixXd qroot = Eigen::MatrixXd::NullaryExpr(
        n, n, [&](Eigen::Index, Eigen::Index) { return rng.uniform(-1, 1); });
    Eigen::MatrixXd rroot = Eigen::MatrixXd::NullaryExpr(
        m, m, [&](Eigen::Index, Eigen::Index) { return rng.uniform(-1, 1); });
    const Eigen::MatrixXd q = qroot.transpose() * qroot;
    const Eigen::MatrixXd r =
        rroot.transpose() * rroot + Eigen::MatrixXd::Identity(m, m);
    const CostSpec cost = CostSpec::make(q, r, q, 1);
    const Eigen::VectorXd x = rng.normal_vector(n);
    const Eigen::VectorXd u = rng.normal_vector(m);

    double manual = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) manual += x(i) * q(i, j) * x(j);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) manual += u(i) * r(i, j) * u(j);
    CHECK(stage_cost(x, u, cost) == doctest::Approx(manual).epsilon(1e-12));
  }
}

TEST_CASE("stage_cost is nonnegative for PSD weights") {
  Philox4x32 rng(12, 0);
  Eigen::MatrixXd qroot(2, 2), rroot(2, 2);
  qroot << 1.0, 0.3, 0.0, 0.5;
  rroot << 0.8, 0.0, 0.2, 1.1;
  const CostSpec cost = CostSpec::make(qroot.transpose() * qroot,
                                       rroot.transpose() * rroot +
                                           1e-6 * Eigen::MatrixXd::Identity(2, 2),
                                       qroot.transpose() * qroot, 1);
  for (int i = 0; i < 1000; ++i) {
    CHECK(stage_cost(rng.normal_vector(2), rng.normal_vector(2), cost) >=
          0.0);
  }
}

TEST_CASE("empirical moments match recomputation") {
  Philox4x32 rng(13, 0);
  Eigen::MatrixXd samples(3, 7);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 7; ++j) samples(i, j) = rng.normal();
  const auto emp = EmpiricalDistribution::from_samples(samples);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(3);
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(3, 3);
  for (int j = 0; j < 7; ++j) {
    mean += samples.col(j) / 7.0;
    second += samples.col(j) * samples.col(j).transpose() / 7.0;
  }
  CHECK((emp.mean - mean).norm() <= 1e-12);
  CHECK((emp.second_moment - second).norm() <= 1e-12);
}

TEST_CASE("penalized_stage_cost") {
  const CostSpec cost = CostSpec::make(Eigen::MatrixXd::Identity(1, 1),
                                       Eigen::MatrixXd::Identity(1, 1),
                                       Eigen::MatrixXd::Identity(1, 1), 1);
  Eigen::VectorXd x(1), u(1);
  x << 2.0;
  u << -1.0;

  SUBCASE("mu equal to the empirical distribution pays no penalty") {
    Eigen::MatrixXd support(1, 3);
    support << -0.5, 0.1, 0.7;
    const auto emp = EmpiricalDistribution::from_samples(support);
    const auto mu = to_discrete(emp);
    CHECK(penalized_stage_cost(x, u, mu, emp, 3.0, cost) ==
          doctest::Approx(stage_cost(x, u, cost)).epsilon(1e-14));
  }

  SUBCASE("single atoms: quadratic transport") {
    Eigen::MatrixXd wa(1, 1), wb(1, 1);
    wa << 1.5;
    wb << 0.25;
    const auto emp = EmpiricalDistribution::from_samples(wb);
    const auto mu = DiscreteDistribution::uniform(wa);
    const double lambda = 2.0;
    const double expected =
        stage_cost(x, u, cost) - lambda * (1.5 - 0.25) * (1.5 - 0.25);
    CHECK(penalized_stage_cost(x, u, mu, emp, lambda, cost) ==
          doctest::Approx(expected).epsilon(1e-14));
  }

  SUBCASE("N=3 shuffled supports agree with the exhaustive coupling") {
    Philox4x32 rng(17, 0);
    for (int trial = 0; trial < 10; ++trial) {
      Eigen::MatrixXd mu_pts(2, 3), nu_pts(2, 3);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 3; ++j) {
          mu_pts(i, j) = rng.normal();
          nu_pts(i, j) = rng.normal();
        }
      Eigen::MatrixXd a(2, 2), b(2, 1), xi(2, 2);
      a.setIdentity();
      b.setOnes();
      xi.setIdentity();
      const CostSpec cost2 = CostSpec::make(Eigen::MatrixXd::Identity(2, 2),
                                            Eigen::MatrixXd::Identity(1, 1),
                                            Eigen::MatrixXd::Identity(2, 2), 1);
      const auto emp = EmpiricalDistribution::from_samples(nu_pts);
      const auto mu = DiscreteDistribution::uniform(mu_pts);

      Eigen::MatrixXd pair_cost(3, 3);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          pair_cost(i, j) = (mu_pts.col(i) - nu_pts.col(j)).squaredNorm();
      const double w2sq = oracle::min_permutation_cost(pair_cost) / 3.0;

      const Eigen::VectorXd x2 = rng.normal_vector(2);
      const Eigen::VectorXd u2 = rng.normal_vector(1);
      const double lambda = 1.7;
      CHECK(penalized_stage_cost(x2, u2, mu, emp, lambda, cost2) ==
            doctest::Approx(stage_cost(x2, u2, cost2) - lambda * w2sq)
                .epsilon(1e-12));
    }
  }
}
