#include "wlqc/powergrid.hpp"

#include <cmath>
#include <sstream>

#include "wlqc/numeric.hpp"
#include "wlqc/rng.hpp"
#include "wlqc/serialize.hpp"

namespace wlqc::powergrid {

GridModel GridModel::make(double omega_s, Eigen::VectorXd inertia_h,
                          Eigen::VectorXd damping, Eigen::MatrixXd laplacian,
                          double dt) {
  const int g = static_cast<int>(inertia_h.size());
  if (damping.size() != g || laplacian.rows() != g || laplacian.cols() != g)
    throw SolverError(ErrorCode::BadDataFile,
                      "grid model dimensions are inconsistent");
  if (omega_s <= 0.0 || dt <= 0.0)
    throw SolverError(ErrorCode::BadDataFile,
                      "omega_s and dt must be positive");
  if (inertia_h.minCoeff() <= 0.0)
    throw SolverError(ErrorCode::BadDataFile, "inertias must be positive");
  if (damping.minCoeff() <= 0.0)
    throw SolverError(ErrorCode::BadDataFile, "dampings must be positive");
  if ((laplacian - laplacian.transpose()).norm() >
      1e-9 * (1.0 + laplacian.norm()))
    throw SolverError(ErrorCode::BadDataFile, "Laplacian must be symmetric");
  if (laplacian.rowwise().sum().cwiseAbs().maxCoeff() > 1e-9)
    throw SolverError(ErrorCode::BadDataFile,
                      "Laplacian rows must sum to zero");
  GridModel grid;
  grid.omega_s = omega_s;
  grid.inertia_h = std::move(inertia_h);
  grid.damping = std::move(damping);
  grid.laplacian = std::move(laplacian);
  grid.dt = dt;
  return grid;
}

GridModel synthetic10() {
  const int g = 10;
  Eigen::VectorXd h(g), d(g);
  // Aggregated-area inertias and damping on a 100 MVA system base; the
  // largest entries stand for big equivalenced areas.
  h << 12.0, 50.0, 20.0, 80.0, 15.0, 60.0, 25.0, 100.0, 18.0, 40.0;
  d << 0.6, 2.0, 1.0, 3.0, 0.8, 2.4, 1.2, 3.6, 0.9, 1.8;

  // Ring with three chords; weights are effective line stiffnesses
  // |Y_ij| E_i E_j cos(delta*_i - delta*_j) at the flat operating point.
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(g, g);
  auto add_edge = [&](int i, int j, double b) {
    l(i, j) -= b;
    l(j, i) -= b;
    l(i, i) += b;
    l(j, j) += b;
  };
  const double ring[10] = {19.0, 13.0, 16.0, 11.0, 14.0,
                           18.0, 12.0, 15.0, 10.0, 17.0};
  for (int i = 0; i < g; ++i) add_edge(i, (i + 1) % g, ring[i]);
  add_edge(0, 4, 9.0);
  add_edge(2, 7, 12.0);
  add_edge(5, 9, 10.0);

  return GridModel::make(2.0 * M_PI * 60.0, h, d, l, 0.1);
}

std::string grid_file_text(const GridModel& grid) {
  std::ostringstream os;
  os << "wlqc-grid v1\n";
  os << "n_gen " << grid.n_gen() << "\n";
  os << "omega_s " << io::fmt17(grid.omega_s) << "\n";
  os << "dt " << io::fmt17(grid.dt) << "\n";
  os << "H";
  for (int i = 0; i < grid.n_gen(); ++i)
    os << " " << io::fmt17(grid.inertia_h(i));
  os << "\nd";
  for (int i = 0; i < grid.n_gen(); ++i) os << " " << io::fmt17(grid.damping(i));
  os << "\nL\n";
  for (int i = 0; i < grid.n_gen(); ++i) {
    for (int j = 0; j < grid.n_gen(); ++j) {
      if (j) os << " ";
      os << io::fmt17(grid.laplacian(i, j));
    }
    os << "\n";
  }
  std::string body = os.str();
  char checksum[32];
  std::snprintf(checksum, sizeof(checksum), "checksum %016llx\n",
                static_cast<unsigned long long>(io::fnv1a64(body)));
  return body + checksum;
}

GridModel load_grid_file(const std::string& path) {
  const std::string text = io::read_text_file(path);
  const size_t checksum_pos = text.rfind("checksum ");
  if (checksum_pos == std::string::npos)
    throw SolverError(ErrorCode::BadDataFile,
                      path + ": missing checksum line");
  const std::string body = text.substr(0, checksum_pos);
  std::istringstream checksum_line(text.substr(checksum_pos));
  std::string tag, hex;
  checksum_line >> tag >> hex;
  if (hex.size() != 16)
    throw SolverError(ErrorCode::BadDataFile, path + ": malformed checksum");
  const std::uint64_t stated = std::stoull(hex, nullptr, 16);
  if (stated != io::fnv1a64(body))
    throw SolverError(ErrorCode::BadDataFile,
                      path + ": checksum mismatch (corrupt or edited file)");

  std::istringstream in(body);
  std::string magic, version;
  in >> magic >> version;
  if (magic != "wlqc-grid" || version != "v1")
    throw SolverError(ErrorCode::BadDataFile, path + ": not a grid file");
  std::string key;
  int g = 0;
  double omega_s = 0.0, dt = 0.0;
  in >> key >> g;
  if (key != "n_gen" || g < 1)
    throw SolverError(ErrorCode::BadDataFile, path + ": bad n_gen");
  in >> key >> omega_s;
  if (key != "omega_s")
    throw SolverError(ErrorCode::BadDataFile, path + ": bad omega_s");
  in >> key >> dt;
  if (key != "dt")
    throw SolverError(ErrorCode::BadDataFile, path + ": bad dt");
  Eigen::VectorXd h(g), d(g);
  in >> key;
  if (key != "H") throw SolverError(ErrorCode::BadDataFile, path + ": bad H");
  for (int i = 0; i < g; ++i) in >> h(i);
  in >> key;
  if (key != "d") throw SolverError(ErrorCode::BadDataFile, path + ": bad d");
  for (int i = 0; i < g; ++i) in >> d(i);
  in >> key;
  if (key != "L") throw SolverError(ErrorCode::BadDataFile, path + ": bad L");
  Eigen::MatrixXd l(g, g);
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) in >> l(i, j);
  if (!in)
    throw SolverError(ErrorCode::BadDataFile, path + ": truncated grid file");
  return GridModel::make(omega_s, std::move(h), std::move(d), std::move(l),
                         dt);
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> build_state_space(
    const GridModel& grid) {
  const int g = grid.n_gen();
  const Eigen::VectorXd m_inv = grid.inertia_m().cwiseInverse();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * g, 2 * g);
  a.topRightCorner(g, g) = Eigen::MatrixXd::Identity(g, g);
  a.bottomLeftCorner(g, g) = -(m_inv.asDiagonal() * grid.laplacian);
  a.bottomRightCorner(g, g) =
      (-(m_inv.cwiseProduct(grid.damping))).asDiagonal();
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(2 * g, g);
  b.bottomRows(g) = Eigen::MatrixXd(m_inv.asDiagonal());
  return {std::move(a), std::move(b)};
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> zoh_discretize(
    const Eigen::MatrixXd& a_c, const Eigen::MatrixXd& b_c, double dt) {
  if (dt <= 0.0)
    throw SolverError(ErrorCode::BadDataFile, "dt must be positive");
  const int n = static_cast<int>(a_c.rows());
  const int m = static_cast<int>(b_c.cols());
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = a_c * dt;
  aug.topRightCorner(n, m) = b_c * dt;
  const Eigen::MatrixXd e = numeric::expm(aug);
  return {e.topLeftCorner(n, n), e.topRightCorner(n, m)};
}

DemoScenario demo_scenario(const GridModel& grid, double theta, int N,
                           std::uint64_t seed) {
  const int g = grid.n_gen();
  const auto [a_c, b_c] = build_state_space(grid);
  const auto [a_d, b_d] = zoh_discretize(a_c, b_c, grid.dt);

  DemoScenario demo;
  demo.sys = LinearSystem::make(a_d, b_d, b_d);

  // Angle cost through the consensus projector: a uniform angle shift is
  // costless, only relative angles are charged.
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(2 * g, 2 * g);
  q.topLeftCorner(g, g) =
      0.5 * (Eigen::MatrixXd::Identity(g, g) -
             Eigen::MatrixXd::Constant(g, g, 1.0 / g));
  q.bottomRightCorner(g, g) = 0.5 * Eigen::MatrixXd::Identity(g, g);
  demo.cost = CostSpec::make(q, Eigen::MatrixXd::Identity(g, g), q, 150, 0.0);

  demo.sample_mean = 0.02;
  demo.sample_sigma = 0.1;
  Philox4x32 rng(seed, /*stream=*/0);
  Eigen::MatrixXd samples(g, N);
  for (int i = 0; i < N; ++i)
    samples.col(i) = Eigen::VectorXd::Constant(g, demo.sample_mean) +
                     demo.sample_sigma * rng.normal_vector(g);
  demo.emp = EmpiricalDistribution::from_samples(std::move(samples));

  demo.x0 = Eigen::VectorXd::Zero(2 * g);
  demo.x0(2 * g - 1) = 1.0;  // last generator's frequency kicked by 1
  demo.theta = theta;
  demo.seed = seed;
  return demo;
}

}  // namespace wlqc::powergrid
