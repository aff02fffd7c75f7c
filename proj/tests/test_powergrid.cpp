#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "wlqc/numeric.hpp"
#include "wlqc/powergrid.hpp"
#include "wlqc/rng.hpp"
#include "wlqc/serialize.hpp"

using namespace wlqc;
using namespace wlqc::powergrid;

TEST_CASE("single machine state space") {
  // M = 2H/omega_s = 1 and D = 1 with no network coupling.
  const double omega_s = 2.0 * M_PI * 60.0;
  const GridModel grid =
      GridModel::make(omega_s, Eigen::VectorXd::Constant(1, omega_s / 2.0),
                      Eigen::VectorXd::Ones(1), Eigen::MatrixXd::Zero(1, 1),
                      0.1);
  const auto [a, b] = build_state_space(grid);
  Eigen::MatrixXd a_expected(2, 2);
  a_expected << 0.0, 1.0, 0.0, -1.0;
  CHECK((a - a_expected).norm() <= 1e-12);
  Eigen::MatrixXd b_expected(2, 1);
  b_expected << 0.0, 1.0;
  CHECK((b - b_expected).norm() <= 1e-12);
}

TEST_CASE("Laplacian rows are annihilated in the coupling block") {
  const GridModel grid = synthetic10();
  const auto [a, b] = build_state_space(grid);
  const int g = grid.n_gen();
  const Eigen::VectorXd row_sums =
      a.bottomLeftCorner(g, g) * Eigen::VectorXd::Ones(g);
  CHECK(row_sums.cwiseAbs().maxCoeff() <= 1e-9);
  (void)b;
}

TEST_CASE("three-machine ring has no right-half-plane modes") {
  Eigen::MatrixXd lap(3, 3);
  lap << 2.0, -1.0, -1.0, -1.0, 2.0, -1.0, -1.0, -1.0, 2.0;
  const GridModel grid =
      GridModel::make(2.0 * M_PI * 60.0, Eigen::VectorXd::Constant(3, 4.0),
                      Eigen::VectorXd::Constant(3, 0.02), lap, 0.1);
  const auto [a, b] = build_state_space(grid);
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
  for (int i = 0; i < es.eigenvalues().size(); ++i)
    CHECK(es.eigenvalues()(i).real() <= 1e-9);
  (void)b;
}

TEST_CASE("zero-order hold discretization") {
  SUBCASE("zero dynamics") {
    const Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
    const Eigen::MatrixXd b = Eigen::MatrixXd::Random(3, 2);
    const auto [ad, bd] = zoh_discretize(a, b, 0.25);
    CHECK((ad - Eigen::MatrixXd::Identity(3, 3)).norm() <= 1e-14);
    CHECK((bd - 0.25 * b).norm() <= 1e-14);
  }

  SUBCASE("scalar closed form") {
    Eigen::MatrixXd a(1, 1), b(1, 1);
    a << -1.7;
    b << 0.8;
    const double dt = 0.3;
    const auto [ad, bd] = zoh_discretize(a, b, dt);
    CHECK(ad(0, 0) == doctest::Approx(std::exp(-1.7 * dt)).epsilon(1e-12));
    CHECK(bd(0, 0) ==
          doctest::Approx((std::exp(-1.7 * dt) - 1.0) / -1.7 * 0.8)
              .epsilon(1e-12));
  }

  SUBCASE("matrix exponential inverse identity") {
    Philox4x32 rng(59, 0);
    for (int trial = 0; trial < 5; ++trial) {
      Eigen::MatrixXd a(6, 6);
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) a(i, j) = rng.uniform(-1.0, 1.0);
      const Eigen::MatrixXd prod = numeric::expm(a) * numeric::expm(-a);
      CHECK((prod - Eigen::MatrixXd::Identity(6, 6)).norm() <= 1e-10);
    }
  }
}

TEST_CASE("grid file round trip with checksum") {
  const GridModel grid = synthetic10();
  const std::string text = grid_file_text(grid);
  const auto tmp = std::filesystem::temp_directory_path() / "wlqc_grid_test.grid";
  io::write_text_file(tmp.string(), text);
  const GridModel loaded = load_grid_file(tmp.string());
  CHECK((loaded.laplacian - grid.laplacian).norm() == 0.0);
  CHECK((loaded.inertia_h - grid.inertia_h).norm() == 0.0);
  CHECK(loaded.omega_s == grid.omega_s);

  // Any edit must break the checksum.
  std::string corrupted = text;
  const size_t pos = corrupted.find("n_gen 10");
  corrupted.replace(pos, 8, "n_gen 11");
  io::write_text_file(tmp.string(), corrupted);
  CHECK_THROWS_AS(load_grid_file(tmp.string()), SolverError);
  std::filesystem::remove(tmp);
}

TEST_CASE("bundled data file matches the embedded network") {
  const auto path = std::filesystem::path(WLQC_SOURCE_DIR) / "data" /
                    "synthetic10.grid";
  const GridModel loaded = load_grid_file(path.string());
  const GridModel embedded = synthetic10();
  CHECK((loaded.laplacian - embedded.laplacian).norm() == 0.0);
  CHECK((loaded.inertia_h - embedded.inertia_h).norm() == 0.0);
  CHECK((loaded.damping - embedded.damping).norm() == 0.0);
}

TEST_CASE("demo scenario assembly") {
  const GridModel grid = synthetic10();
  const DemoScenario demo = demo_scenario(grid, 0.5, 10, 7);
  const int g = grid.n_gen();

  SUBCASE("angle cost annihilates a uniform shift") {
    Eigen::VectorXd shift = Eigen::VectorXd::Zero(2 * g);
    shift.head(g).setOnes();
    CHECK(std::abs(shift.dot(demo.cost.Q * shift)) <= 1e-12);
  }

  SUBCASE("sample moments are near the generating distribution") {
    CHECK(demo.emp.count() == 10);
    const double grand_mean = demo.emp.support.mean();
    // 100 draws of sigma = 0.1: the grand mean is within ~4 sigma/sqrt(100).
    CHECK(std::abs(grand_mean - 0.02) <= 0.04);
  }

  SUBCASE("initial state kicks the last generator frequency") {
    CHECK(demo.x0(2 * g - 1) == 1.0);
    CHECK(demo.x0.norm() == 1.0);
  }

  SUBCASE("horizon and weights follow the experiment setup") {
    CHECK(demo.cost.horizon == 150);
    CHECK((demo.cost.R - Eigen::MatrixXd::Identity(g, g)).norm() == 0.0);
  }
}

TEST_CASE("ZOH is consistent with a fine-step continuous integration") {
  // Substep dt/100; a classical RK4 step is needed at that resolution
  // because the network's electromechanical modes sit near 3 Hz and a
  // forward-Euler substep cannot hold 1e-3 over 5 seconds there.
  const GridModel grid = synthetic10();
  const auto [ac, bc] = build_state_space(grid);
  const auto [ad, bd] = zoh_discretize(ac, bc, grid.dt);
  const int n = static_cast<int>(ac.rows());

  Philox4x32 rng(61, 0);
  Eigen::VectorXd x = rng.normal_vector(n);
  const Eigen::VectorXd u = rng.normal_vector(grid.n_gen());
  auto deriv = [&](const Eigen::VectorXd& state) {
    return (ac * state + bc * u).eval();
  };

  Eigen::VectorXd x_cont = x;
  Eigen::VectorXd x_discrete = x;
  double traj_norm = 0.0, err_norm = 0.0;
  const int steps = static_cast<int>(5.0 / grid.dt);
  const int substeps = 100;
  const double h = grid.dt / substeps;
  for (int step = 0; step < steps; ++step) {
    for (int sub = 0; sub < substeps; ++sub) {
      const Eigen::VectorXd k1 = deriv(x_cont);
      const Eigen::VectorXd k2 = deriv(x_cont + 0.5 * h * k1);
      const Eigen::VectorXd k3 = deriv(x_cont + 0.5 * h * k2);
      const Eigen::VectorXd k4 = deriv(x_cont + h * k3);
      x_cont += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    x_discrete = ad * x_discrete + bd * u;
    traj_norm += x_discrete.norm();
    err_norm += (x_cont - x_discrete).norm();
  }
  CHECK(err_norm <= 1e-3 * (1.0 + traj_norm));
}
