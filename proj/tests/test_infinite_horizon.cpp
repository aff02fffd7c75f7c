#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "wlqc/finite_horizon.hpp"
#include "wlqc/infinite_horizon.hpp"
#include "wlqc/numeric.hpp"
#include "wlqc/rng.hpp"

using namespace wlqc;
using namespace wlqc::infinite_horizon;

namespace {

struct Scalar {
  LinearSystem sys;
  CostSpec cost;
  EmpiricalDistribution emp;
};

Scalar scalar_problem(double a, double b, double xi, double q, double r,
                      std::vector<double> samples) {
  Eigen::MatrixXd am(1, 1), bm(1, 1), xim(1, 1), qm(1, 1), rm(1, 1);
  am << a;
  bm << b;
  xim << xi;
  qm << q;
  rm << r;
  Eigen::MatrixXd s(1, static_cast<int>(samples.size()));
  for (size_t i = 0; i < samples.size(); ++i) s(0, static_cast<int>(i)) = samples[i];
  return Scalar{LinearSystem::make(am, bm, xim),
                CostSpec::make(qm, rm, qm, CostSpec::kInfiniteHorizon),
                EmpiricalDistribution::from_samples(s)};
}

}  // namespace

TEST_CASE("check_assumptions") {
  SUBCASE("full actuation: Phi = I is PSD and stabilizable for any A") {
    Eigen::MatrixXd a(2, 2);
    a << 3.0, 1.0, 0.0, 2.0;  // wildly unstable
    const LinearSystem sys = LinearSystem::make(
        a, Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Zero(2, 2));
    const CostSpec cost = CostSpec::make(Eigen::MatrixXd::Identity(2, 2),
                                         Eigen::MatrixXd::Identity(2, 2),
                                         Eigen::MatrixXd::Identity(2, 2),
                                         CostSpec::kInfiniteHorizon);
    const auto cert = check_assumptions(sys, cost, 4.0);
    CHECK(cert.phi_min_eig == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cert.phi_psd);
    CHECK(cert.stabilizable);
    CHECK(cert.observable);
  }

  SUBCASE("scalar sign: lambda below R (Xi/B)^2 makes Phi negative") {
    auto p = scalar_problem(0.9, 1.0, 2.0, 1.0, 1.0, {0.0});
    // Phi = 1 - 4/lambda < 0 iff lambda < 4.
    CHECK_FALSE(check_assumptions(p.sys, p.cost, 3.0).phi_psd);
    CHECK(check_assumptions(p.sys, p.cost, 5.0).phi_psd);
  }

  SUBCASE("stabilizable but not controllable: actuated unstable mode") {
    Eigen::MatrixXd a(2, 2), b(2, 2);
    a << 2.0, 0.0, 0.0, 0.5;
    b << 1.0, 0.0, 0.0, 0.0;  // Phi^{1/2} = diag(1, 0)
    const LinearSystem sys =
        LinearSystem::make(a, b, Eigen::MatrixXd::Zero(2, 2));
    const CostSpec cost = CostSpec::make(Eigen::MatrixXd::Identity(2, 2),
                                         Eigen::MatrixXd::Identity(2, 2),
                                         Eigen::MatrixXd::Identity(2, 2),
                                         CostSpec::kInfiniteHorizon);
    const auto cert = check_assumptions(sys, cost, 10.0);
    CHECK(cert.stabilizable);

    Eigen::MatrixXd b_bad(2, 2);
    b_bad << 0.0, 0.0, 0.0, 1.0;  // unstable mode unactuated
    const LinearSystem sys_bad =
        LinearSystem::make(a, b_bad, Eigen::MatrixXd::Zero(2, 2));
    CHECK_FALSE(check_assumptions(sys_bad, cost, 10.0).stabilizable);
  }
}

TEST_CASE("fixed-point ARE solve") {
  SUBCASE("Xi = 0 reduces to the standard LQR ARE") {
    auto p = scalar_problem(0.9, 1.0, 0.0, 1.0, 1.0, {0.5, -0.1});
    const SteadySolution sol = solve_are_fixed_point(p.sys, p.cost, p.emp, 2.0);
    Eigen::MatrixXd lqr = p.cost.Qf;
    for (int i = 0; i < 3000; ++i)
      lqr = oracle::lqr_textbook_step(lqr, p.sys.A, p.sys.B, p.cost.Q, p.cost.R);
    CHECK(sol.P(0, 0) == doctest::Approx(lqr(0, 0)).epsilon(1e-10));
    CHECK(std::abs(sol.rho) <= 1e-12);
    CHECK(sol.r.norm() <= 1e-12);
  }

  SUBCASE("unit scalar instance has the fixed point 5/3") {
    // p = 1 + p/(1 + 0.9 p)  =>  0.9 p^2 - 0.9 p - 1 = 0  =>  p = 5/3.
    auto p = scalar_problem(1.0, 1.0, 1.0, 1.0, 1.0, {0.0});
    const SteadySolution sol = solve_are_fixed_point(p.sys, p.cost, p.emp, 10.0);
    const double pss = sol.P(0, 0);
    CHECK(pss == doctest::Approx(5.0 / 3.0).epsilon(1e-10));
    // Back-substitution into the stated recursion.
    const double residual = std::abs(pss - (1.0 + pss / (1.0 + 0.9 * pss)));
    CHECK(residual <= 1e-10);
  }

  SUBCASE("zero-mean samples give a zero affine part") {
    auto p = scalar_problem(0.8, 1.0, 0.6, 1.0, 1.0, {0.4, -0.4});
    const SteadySolution sol = solve_are_fixed_point(p.sys, p.cost, p.emp, 8.0);
    CHECK(sol.r.norm() <= 1e-12);
    CHECK(sol.L.norm() <= 1e-12);
  }

  SUBCASE("limit is independent of the initialization") {
    Philox4x32 rng(307, 0);
    const auto inst = oracle::random_steady_instance(rng, 3, 2, 2, 3);
    const double tol = 1e-12;
    const SteadySolution from_qf =
        solve_are_fixed_point(inst.sys, inst.cost, inst.emp, inst.lambda);
    const SteadySolution from_zero = solve_are_fixed_point(
        inst.sys, inst.cost, inst.emp, inst.lambda, 100000, tol,
        Eigen::MatrixXd::Zero(3, 3));
    const SteadySolution from_large = solve_are_fixed_point(
        inst.sys, inst.cost, inst.emp, inst.lambda, 100000, tol,
        10.0 * Eigen::MatrixXd::Identity(3, 3));
    CHECK((from_zero.P - from_qf.P).norm() <= 10.0 * tol * (1.0 + from_qf.P.norm()));
    CHECK((from_large.P - from_qf.P).norm() <=
          10.0 * tol * (1.0 + from_qf.P.norm()));
  }
}

TEST_CASE("eigen-method ARE solve") {
  SUBCASE("scalar cross-method agreement") {
    auto p = scalar_problem(1.0, 1.0, 1.0, 1.0, 1.0, {0.2});
    const SteadySolution fixed = solve_are_fixed_point(p.sys, p.cost, p.emp, 10.0);
    const SteadySolution eig = solve_are_eigen(p.sys, p.cost, p.emp, 10.0);
    CHECK((fixed.P - eig.P).norm() <= 1e-8 * (1.0 + fixed.P.norm()));
    CHECK(eig.method == Method::Eigen);
  }

  SUBCASE("random instances: dual-method agreement and symplectic pairing") {
    Philox4x32 rng(311, 0);
    for (int trial = 0; trial < 15; ++trial) {
      const int n = 2 + static_cast<int>(rng.uniform_index(3));
      const auto inst = oracle::random_steady_instance(rng, n, 2, 2, 3);
      const SteadySolution fixed =
          solve_are_fixed_point(inst.sys, inst.cost, inst.emp, inst.lambda);
      SteadySolution eig;
      try {
        eig = solve_are_eigen(inst.sys, inst.cost, inst.emp, inst.lambda);
      } catch (const SolverError& err) {
        CHECK(err.code() == ErrorCode::SingularA);
        continue;
      }
      CHECK((fixed.P - eig.P).norm() <= 1e-6 * (1.0 + fixed.P.norm()));

      // (gamma, 1/gamma) pairing of the pencil eigenvalues.
      Eigen::LLT<Eigen::MatrixXd> r_chol(inst.cost.R);
      const Eigen::MatrixXd phi =
          inst.sys.B * r_chol.solve(inst.sys.B.transpose()) -
          (1.0 / inst.lambda) * inst.sys.Xi * inst.sys.Xi.transpose();
      Eigen::PartialPivLU<Eigen::MatrixXd> lu_at(inst.sys.A.transpose());
      Eigen::MatrixXd h(2 * n, 2 * n);
      h.topLeftCorner(n, n) = inst.sys.A + phi * lu_at.solve(inst.cost.Q);
      h.topRightCorner(n, n) =
          -phi * lu_at.solve(Eigen::MatrixXd::Identity(n, n));
      h.bottomLeftCorner(n, n) = -lu_at.solve(inst.cost.Q);
      h.bottomRightCorner(n, n) = lu_at.solve(Eigen::MatrixXd::Identity(n, n));
      Eigen::EigenSolver<Eigen::MatrixXd> es(h, false);
      std::vector<std::complex<double>> eigs;
      for (int i = 0; i < 2 * n; ++i) eigs.push_back(es.eigenvalues()(i));
      for (const auto& gamma : eigs) {
        const std::complex<double> inverse = 1.0 / gamma;
        double best = 1e300;
        for (const auto& other : eigs) best = std::min(best, std::abs(other - inverse));
        CHECK(best <= 1e-8 * (1.0 + std::abs(inverse)));
      }
    }
  }
}

TEST_CASE("Lyapunov identity of the stable closed loop") {
  Philox4x32 rng(313, 0);
  for (int trial = 0; trial < 8; ++trial) {
    const auto inst = oracle::random_steady_instance(rng, 3, 2, 2, 3);
    const SteadySolution sol =
        solve_are_fixed_point(inst.sys, inst.cost, inst.emp, inst.lambda);
    Eigen::LLT<Eigen::MatrixXd> r_chol(inst.cost.R);
    const Eigen::MatrixXd phi =
        inst.sys.B * r_chol.solve(inst.sys.B.transpose()) -
        (1.0 / inst.lambda) * inst.sys.Xi * inst.sys.Xi.transpose();
    const Eigen::MatrixXd abar =
        (Eigen::MatrixXd::Identity(3, 3) + phi * sol.P)
            .partialPivLu()
            .solve(inst.sys.A);
    const Eigen::MatrixXd pabar = sol.P * abar;
    const Eigen::MatrixXd qbar = inst.cost.Q + pabar.transpose() * phi * pabar;
    const double residual =
        (sol.P - abar.transpose() * sol.P * abar - qbar).norm();
    CHECK(residual <= 1e-8 * (1.0 + sol.P.norm()));
  }
}

TEST_CASE("steady worst-case distribution") {
  SUBCASE("penalty dominance pins the support") {
    auto p = scalar_problem(0.9, 1.0, 0.7, 1.0, 1.0, {0.4, -0.1});
    const SteadySolution sol = solve_are_fixed_point(p.sys, p.cost, p.emp, 1e9);
    Eigen::VectorXd x(1);
    x << 0.3;
    const auto wc = steady_worst_case_distribution(x, sol, p.sys, p.emp);
    CHECK((wc.support - p.emp.support).norm() <= 1e-6);
  }

  SUBCASE("x = 0 with zero-mean samples leaves only the sample pull") {
    auto p = scalar_problem(0.9, 1.0, 0.7, 1.0, 1.0, {0.5, -0.5});
    const double lambda = 9.0;
    const SteadySolution sol =
        solve_are_fixed_point(p.sys, p.cost, p.emp, lambda);
    const auto wc = steady_worst_case_distribution(Eigen::VectorXd::Zero(1),
                                                   sol, p.sys, p.emp);
    const double denom = lambda - 0.49 * sol.P(0, 0);
    for (int i = 0; i < 2; ++i)
      CHECK(wc.support(0, i) ==
            doctest::Approx(lambda * p.emp.support(0, i) / denom).epsilon(1e-10));
  }

  SUBCASE("support points maximize the steady stage objective") {
    auto p = scalar_problem(0.85, 1.0, 0.6, 1.0, 1.0, {0.3, -0.2});
    const double lambda = 7.0;
    const SteadySolution sol =
        solve_are_fixed_point(p.sys, p.cost, p.emp, lambda);
    Philox4x32 rng(317, 0);
    const Eigen::VectorXd x = rng.normal_vector(1);
    const double u = (sol.K * x + sol.L)(0);
    const auto wc = steady_worst_case_distribution(x, sol, p.sys, p.emp);
    for (int i = 0; i < 2; ++i) {
      auto objective = [&](double w) {
        const double xn = 0.85 * x(0) + u + 0.6 * w;
        const double h = sol.P(0, 0) * xn * xn + 2.0 * sol.r(0) * xn;
        const double d = p.emp.support(0, i) - w;
        return h - lambda * d * d;
      };
      const double grid_best = oracle::grid_argmax(objective, -5.0, 5.0, 100001);
      CHECK(std::abs(wc.support(0, i) - grid_best) <= 2e-4);
    }
  }
}

TEST_CASE("Bellman residual") {
  Philox4x32 rng(331, 0);
  const auto inst = oracle::random_steady_instance(rng, 3, 2, 2, 4);
  const SteadySolution sol =
      solve_are_fixed_point(inst.sys, inst.cost, inst.emp, inst.lambda);
  std::vector<Eigen::VectorXd> xs;
  for (int i = 0; i < 50; ++i) xs.push_back(rng.normal_vector(3));

  SUBCASE("identity holds at random states") {
    const double residual =
        bellman_residual(sol, inst.sys, inst.cost, inst.emp, inst.lambda, xs);
    CHECK(residual <= 1e-8 * (1.0 + std::abs(sol.rho)));
  }

  SUBCASE("x = 0 reduces to the z-step identity") {
    const double residual = bellman_residual(sol, inst.sys, inst.cost, inst.emp,
                                             inst.lambda, {Eigen::VectorXd::Zero(3)});
    CHECK(residual <= 1e-10 * (1.0 + std::abs(sol.rho)));
  }

  SUBCASE("a corrupted solution is detected") {
    SteadySolution bad = sol;
    bad.P += 0.1 * Eigen::MatrixXd::Identity(3, 3);
    const double residual =
        bellman_residual(bad, inst.sys, inst.cost, inst.emp, inst.lambda, xs);
    CHECK(residual > 1e-3);
  }
}

TEST_CASE("stability certificates") {
  Philox4x32 rng(337, 0);
  SUBCASE("zero-mean samples give a zero mean-state limit") {
    auto p = scalar_problem(0.9, 1.0, 0.5, 1.0, 1.0, {0.6, -0.6});
    const SteadySolution sol = solve_are_fixed_point(p.sys, p.cost, p.emp, 8.0);
    const auto cert = stability_certificates(sol, p.sys, p.cost, p.emp);
    CHECK(cert.mean_state_limit.norm() <= 1e-12);
  }

  SUBCASE("radii below one and the forward-simulated mean-state limit") {
    for (int trial = 0; trial < 5; ++trial) {
      const auto inst = oracle::random_steady_instance(rng, 3, 2, 2, 3);
      const SteadySolution sol =
          solve_are_fixed_point(inst.sys, inst.cost, inst.emp, inst.lambda);
      const auto cert =
          stability_certificates(sol, inst.sys, inst.cost, inst.emp);
      CHECK(cert.closed_loop_radius < 1.0);
      CHECK(cert.mean_gain_radius < 1.0);

      // Forward simulation of the mean-state recursion (closed loop under
      // the worst-case distribution, averaged over atoms).
      Eigen::VectorXd mean = rng.normal_vector(3);
      for (int t = 0; t < 10000; ++t) {
        const auto wc =
            steady_worst_case_distribution(mean, sol, inst.sys, inst.emp);
        const Eigen::VectorXd w_mean = wc.support.rowwise().mean();
        mean = (inst.sys.A + inst.sys.B * sol.K) * mean +
               inst.sys.B * sol.L + inst.sys.Xi * w_mean;
      }
      CHECK((mean - cert.mean_state_limit).norm() <= 1e-6);
    }
  }
}

TEST_CASE("average cost matches the Cesaro limit of z0/T") {
  Philox4x32 rng(347, 0);
  const auto inst = oracle::random_steady_instance(rng, 2, 1, 1, 3);
  const SteadySolution sol =
      solve_are_fixed_point(inst.sys, inst.cost, inst.emp, inst.lambda);
  CostSpec fin = inst.cost;
  fin.horizon = 200;
  const auto fsol =
      finite_horizon::solve_finite(inst.sys, fin, {inst.emp}, inst.lambda);
  const double cesaro = fsol.values[0].z / 200.0;
  CHECK(std::abs(cesaro - sol.rho) <= 1e-4 * (1.0 + std::abs(sol.rho)));
}

TEST_CASE("hinf attenuation level") {
  SUBCASE("no disturbance channel returns the search floor") {
    auto p = scalar_problem(0.9, 1.0, 0.0, 1.0, 1.0, {0.0});
    const double tol = 1e-4;
    CHECK(hinf_attenuation_level(p.sys, p.cost, tol) ==
          doctest::Approx(tol).epsilon(1e-12));
  }

  SUBCASE("unit scalar instance has level 2 with a verified bracket") {
    auto p = scalar_problem(1.0, 1.0, 1.0, 1.0, 1.0, {0.0});
    const double tol = 1e-5;
    const double level = hinf_attenuation_level(p.sys, p.cost, tol);
    CHECK(level == doctest::Approx(2.0).epsilon(1e-3));
    const auto solves = [&](double lambda) {
      try {
        solve_are_fixed_point(p.sys, p.cost, p.emp, lambda);
        return true;
      } catch (const SolverError&) {
        return false;
      }
    };
    CHECK(solves(level + tol));
    CHECK_FALSE(solves(level - tol));
  }

  SUBCASE("level is monotone in the disturbance gain") {
    auto strong = scalar_problem(0.9, 1.0, 1.0, 1.0, 1.0, {0.0});
    double previous = hinf_attenuation_level(strong.sys, strong.cost, 1e-5);
    for (double scale : {0.8, 0.5, 0.2}) {
      auto weaker = scalar_problem(0.9, 1.0, scale, 1.0, 1.0, {0.0});
      const double level =
          hinf_attenuation_level(weaker.sys, weaker.cost, 1e-5);
      CHECK(level <= previous + 1e-4);
      previous = level;
    }
  }
}
