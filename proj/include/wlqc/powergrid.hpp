#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "wlqc/model.hpp"

namespace wlqc::powergrid {

// Linearized multi-machine swing model
//   M ddot(delta) + D dot(delta) + L delta = P
// with M = (2/omega_s) diag(H), D = diag(d) and Kron-reduced Laplacian L.
struct GridModel {
  double omega_s = 2.0 * 3.14159265358979323846 * 60.0;
  Eigen::VectorXd inertia_h;  // H_i, seconds
  Eigen::VectorXd damping;    // d_i
  Eigen::MatrixXd laplacian;  // n_gen x n_gen, symmetric, zero row sums
  double dt = 0.1;            // sample time, seconds

  int n_gen() const { return static_cast<int>(inertia_h.size()); }
  Eigen::VectorXd inertia_m() const { return 2.0 * inertia_h / omega_s; }

  static GridModel make(double omega_s, Eigen::VectorXd inertia_h,
                        Eigen::VectorXd damping, Eigen::MatrixXd laplacian,
                        double dt);
};

// Bundled synthetic 10-machine network (ring plus three chords).  Same
// dimensions as the New England test system reduction (n = 20, m = k = 10)
// but with synthetic parameters; the linearization operating point is the
// flat profile delta* = 0, omega* = omega_s, with line stiffnesses folded
// into the Laplacian weights.
GridModel synthetic10();

// Grid data file: plain text with a trailing fnv1a-64 checksum line.
GridModel load_grid_file(const std::string& path);
std::string grid_file_text(const GridModel& grid);

// Continuous-time (A_c, B_c) with state (delta, omega); the disturbance
// enters through the input channel, so Xi_c = B_c.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> build_state_space(
    const GridModel& grid);

// Zero-order hold: A_d = exp(A_c dt), B_d = int_0^dt exp(A_c s) ds B_c via
// the augmented matrix exponential.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> zoh_discretize(
    const Eigen::MatrixXd& a_c, const Eigen::MatrixXd& b_c, double dt);

// Frequency-regulation experiment configuration: discretized plant,
// consensus-projector angle cost with identity frequency/input weights,
// N Gaussian disturbance samples, and the last generator's frequency
// perturbed by 1 in the initial state.
struct DemoScenario {
  LinearSystem sys;
  CostSpec cost;  // horizon 150
  EmpiricalDistribution emp;
  Eigen::VectorXd x0;
  double theta = 0.5;
  std::uint64_t seed = 0;
  double sample_mean = 0.02;
  double sample_sigma = 0.1;
};

DemoScenario demo_scenario(const GridModel& grid, double theta, int N,
                           std::uint64_t seed);

}  // namespace wlqc::powergrid
