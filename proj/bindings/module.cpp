#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "wlqc/finite_horizon.hpp"
#include "wlqc/infinite_horizon.hpp"
#include "wlqc/model.hpp"
#include "wlqc/powergrid.hpp"
#include "wlqc/robustness.hpp"
#include "wlqc/simulator.hpp"
#include "wlqc/tuning.hpp"

namespace py = pybind11;
using namespace wlqc;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Minimax linear-quadratic control with a Wasserstein penalty";

  py::register_exception<SolverError>(m, "SolverError");

  py::class_<LinearSystem>(m, "LinearSystem")
      .def(py::init(&LinearSystem::make), py::arg("A"), py::arg("B"),
           py::arg("Xi"))
      .def_readonly("A", &LinearSystem::A)
      .def_readonly("B", &LinearSystem::B)
      .def_readonly("Xi", &LinearSystem::Xi)
      .def_property_readonly("n", &LinearSystem::n)
      .def_property_readonly("m", &LinearSystem::m)
      .def_property_readonly("k", &LinearSystem::k);

  py::class_<CostSpec>(m, "CostSpec")
      .def(py::init(&CostSpec::make), py::arg("Q"), py::arg("R"),
           py::arg("Qf"), py::arg("horizon"), py::arg("lambda_") = 0.0)
      .def_readonly("Q", &CostSpec::Q)
      .def_readonly("R", &CostSpec::R)
      .def_readonly("Qf", &CostSpec::Qf)
      .def_readwrite("horizon", &CostSpec::horizon)
      .def_readwrite("lambda_", &CostSpec::lambda);

  py::class_<EmpiricalDistribution>(m, "EmpiricalDistribution")
      .def(py::init(&EmpiricalDistribution::from_samples), py::arg("support"))
      .def_readonly("support", &EmpiricalDistribution::support)
      .def_readonly("mean", &EmpiricalDistribution::mean)
      .def_readonly("second_moment", &EmpiricalDistribution::second_moment);

  py::class_<DiscreteDistribution>(m, "DiscreteDistribution")
      .def(py::init(&DiscreteDistribution::make), py::arg("support"),
           py::arg("weights"))
      .def_static("uniform", &DiscreteDistribution::uniform,
                  py::arg("support"))
      .def_readonly("support", &DiscreteDistribution::support)
      .def_readonly("weights", &DiscreteDistribution::weights);

  py::class_<AffinePolicy>(m, "AffinePolicy")
      .def_readonly("K", &AffinePolicy::K)
      .def_readonly("L", &AffinePolicy::L);

  py::class_<ValidationReport>(m, "ValidationReport")
      .def_readonly("ok", &ValidationReport::ok)
      .def_readonly("findings", &ValidationReport::findings);

  m.def("validate_problem", &validate_problem);
  m.def("stage_cost", &stage_cost);
  m.def("terminal_cost", &terminal_cost);
  m.def("penalized_stage_cost", &penalized_stage_cost);

  // finite horizon
  py::class_<finite_horizon::ValueParams>(m, "ValueParams")
      .def_readonly("P", &finite_horizon::ValueParams::P)
      .def_readonly("r", &finite_horizon::ValueParams::r)
      .def_readonly("z", &finite_horizon::ValueParams::z);

  py::class_<finite_horizon::FiniteSolution>(m, "FiniteSolution")
      .def_readonly("values", &finite_horizon::FiniteSolution::values)
      .def_readonly("policies", &finite_horizon::FiniteSolution::policies)
      .def_readonly("lambda_", &finite_horizon::FiniteSolution::lambda)
      .def_readonly("assumption_margin",
                    &finite_horizon::FiniteSolution::assumption_margin)
      .def("value_at", &finite_horizon::FiniteSolution::value_at)
      .def_property_readonly("horizon",
                             &finite_horizon::FiniteSolution::horizon);

  m.def("solve_finite", &finite_horizon::solve_finite, py::arg("sys"),
        py::arg("cost"), py::arg("emp_per_stage"), py::arg("lambda_"));
  m.def("solve_finite_lqg", &finite_horizon::solve_finite_lqg);
  m.def("riccati_step", &finite_horizon::riccati_step);
  m.def("lqg_riccati_step", &finite_horizon::lqg_riccati_step);
  m.def("worst_case_distribution", &finite_horizon::worst_case_distribution);
  m.def("hinf_worst_disturbance", &finite_horizon::hinf_worst_disturbance);

  // infinite horizon
  py::enum_<infinite_horizon::Method>(m, "Method")
      .value("FixedPoint", infinite_horizon::Method::FixedPoint)
      .value("Eigen", infinite_horizon::Method::Eigen)
      .value("Both", infinite_horizon::Method::Both)
      .value("Lqg", infinite_horizon::Method::Lqg);

  py::class_<infinite_horizon::SteadySolution>(m, "SteadySolution")
      .def_readonly("P", &infinite_horizon::SteadySolution::P)
      .def_readonly("r", &infinite_horizon::SteadySolution::r)
      .def_readonly("rho", &infinite_horizon::SteadySolution::rho)
      .def_readonly("K", &infinite_horizon::SteadySolution::K)
      .def_readonly("L", &infinite_horizon::SteadySolution::L)
      .def_readonly("lambda_", &infinite_horizon::SteadySolution::lambda)
      .def_readonly("penalty_margin",
                    &infinite_horizon::SteadySolution::penalty_margin)
      .def_readonly("are_residual",
                    &infinite_horizon::SteadySolution::are_residual)
      .def_readonly(
          "closed_loop_spectral_radius",
          &infinite_horizon::SteadySolution::closed_loop_spectral_radius)
      .def_readonly("mean_state_gain_radius",
                    &infinite_horizon::SteadySolution::mean_state_gain_radius)
      .def_readonly("method", &infinite_horizon::SteadySolution::method);

  py::class_<infinite_horizon::AssumptionCertificate>(m,
                                                      "AssumptionCertificate")
      .def_readonly("phi_min_eig",
                    &infinite_horizon::AssumptionCertificate::phi_min_eig)
      .def_readonly("phi_psd",
                    &infinite_horizon::AssumptionCertificate::phi_psd)
      .def_readonly("stabilizable",
                    &infinite_horizon::AssumptionCertificate::stabilizable)
      .def_readonly("observable",
                    &infinite_horizon::AssumptionCertificate::observable)
      .def_readonly("penalty_margin",
                    &infinite_horizon::AssumptionCertificate::penalty_margin)
      .def("ok", &infinite_horizon::AssumptionCertificate::ok);

  py::class_<infinite_horizon::StabilityCertificates>(m,
                                                      "StabilityCertificates")
      .def_readonly("closed_loop_radius",
                    &infinite_horizon::StabilityCertificates::closed_loop_radius)
      .def_readonly("mean_gain_radius",
                    &infinite_horizon::StabilityCertificates::mean_gain_radius)
      .def_readonly("mean_state_limit",
                    &infinite_horizon::StabilityCertificates::mean_state_limit);

  m.def("check_assumptions", &infinite_horizon::check_assumptions);
  m.def("solve_are_fixed_point", &infinite_horizon::solve_are_fixed_point,
        py::arg("sys"), py::arg("cost"), py::arg("emp"), py::arg("lambda_"),
        py::arg("max_iter") = 100000, py::arg("tol") = 1e-12,
        py::arg("initial") = std::nullopt);
  m.def("solve_are_eigen", &infinite_horizon::solve_are_eigen);
  m.def("solve_are", &infinite_horizon::solve_are);
  m.def("lqg_steady", &infinite_horizon::lqg_steady);
  m.def("steady_worst_case_distribution",
        &infinite_horizon::steady_worst_case_distribution);
  m.def("bellman_residual", &infinite_horizon::bellman_residual);
  m.def("stability_certificates", &infinite_horizon::stability_certificates);
  m.def("hinf_attenuation_level", &infinite_horizon::hinf_attenuation_level);

  // tuning
  py::class_<tuning::LambdaProfile>(m, "LambdaProfile")
      .def_readonly("lambda_hat", &tuning::LambdaProfile::lambda_hat)
      .def_readonly("lambda_hat1", &tuning::LambdaProfile::lambda_hat1)
      .def_readonly("lambda_hat2", &tuning::LambdaProfile::lambda_hat2)
      .def_readonly("lambda_hat_inf", &tuning::LambdaProfile::lambda_hat_inf)
      .def_readonly("search_tol", &tuning::LambdaProfile::search_tol);

  py::class_<tuning::TunedPenalty>(m, "TunedPenalty")
      .def_readonly("lambda_star", &tuning::TunedPenalty::lambda_star)
      .def_readonly("upper_bound", &tuning::TunedPenalty::upper_bound)
      .def_readonly("theta", &tuning::TunedPenalty::theta)
      .def_readonly("evaluations", &tuning::TunedPenalty::evaluations)
      .def_readonly("monotone_tail", &tuning::TunedPenalty::monotone_tail);

  m.def("find_lambda_hat_finite", &tuning::find_lambda_hat_finite);
  m.def("find_lambda_profile_infinite", &tuning::find_lambda_profile_infinite);
  m.def("optimize_lambda_finite", &tuning::optimize_lambda_finite);
  m.def("optimize_lambda_infinite", &tuning::optimize_lambda_infinite);

  // robustness
  py::class_<robustness::RadiusParams>(m, "RadiusParams")
      .def(py::init<>())
      .def_readwrite("N", &robustness::RadiusParams::N)
      .def_readwrite("beta", &robustness::RadiusParams::beta)
      .def_readwrite("T", &robustness::RadiusParams::T)
      .def_readwrite("k", &robustness::RadiusParams::k)
      .def_readwrite("c1", &robustness::RadiusParams::c1)
      .def_readwrite("c2", &robustness::RadiusParams::c2)
      .def_readwrite("q", &robustness::RadiusParams::q)
      .def_readwrite("zeta", &robustness::RadiusParams::zeta);

  m.def("wasserstein2", &robustness::wasserstein2);
  m.def("in_ambiguity_set", &robustness::in_ambiguity_set);
  m.def("radius_light_tail", &robustness::radius_light_tail);
  m.def("radius_compact", &robustness::radius_compact);
  m.def("radius_sensitivity", &robustness::radius_sensitivity,
        py::arg("params"), py::arg("sample_counts"),
        py::arg("compact") = false);

  // simulator
  py::class_<sim::GaussianSpec>(m, "GaussianSpec")
      .def(py::init([](Eigen::VectorXd mean, double sigma) {
             return sim::GaussianSpec{std::move(mean), sigma};
           }),
           py::arg("mean"), py::arg("sigma"))
      .def_readwrite("mean", &sim::GaussianSpec::mean)
      .def_readwrite("sigma", &sim::GaussianSpec::sigma);

  py::class_<sim::ControlPolicy>(m, "ControlPolicy")
      .def_static("stationary", &sim::ControlPolicy::stationary)
      .def_static("per_stage", &sim::ControlPolicy::per_stage);

  py::class_<sim::DisturbancePolicy>(m, "DisturbancePolicy")
      .def_static("sampler", &sim::DisturbancePolicy::sampler)
      .def_static("empirical", &sim::DisturbancePolicy::empirical)
      .def_static("worst_case_finite", &sim::DisturbancePolicy::worst_case_finite)
      .def_static("worst_case_steady", &sim::DisturbancePolicy::worst_case_steady)
      .def_static("hinf_pointwise", &sim::DisturbancePolicy::hinf_pointwise)
      .def_static("fixed_sequence", &sim::DisturbancePolicy::fixed_sequence)
      .def("with_support_shift", &sim::DisturbancePolicy::with_support_shift);

  py::class_<sim::RolloutResult>(m, "RolloutResult")
      .def_readonly("states", &sim::RolloutResult::states)
      .def_readonly("inputs", &sim::RolloutResult::inputs)
      .def_readonly("disturbances", &sim::RolloutResult::disturbances)
      .def_readonly("per_stage_costs", &sim::RolloutResult::per_stage_costs)
      .def_readonly("total_cost", &sim::RolloutResult::total_cost)
      .def_readonly("penalized_cost", &sim::RolloutResult::penalized_cost);

  py::class_<sim::MonteCarloEstimate>(m, "MonteCarloEstimate")
      .def_readonly("mean", &sim::MonteCarloEstimate::mean)
      .def_readonly("std_error", &sim::MonteCarloEstimate::std_error)
      .def_readonly("n_runs", &sim::MonteCarloEstimate::n_runs)
      .def_readonly("seed", &sim::MonteCarloEstimate::seed);

  m.def("rollout", &sim::rollout, py::arg("sys"), py::arg("policy"),
        py::arg("dist"), py::arg("x0"), py::arg("T"), py::arg("cost"),
        py::arg("seed"), py::arg("lambda_") = 0.0, py::arg("stream") = 0);
  m.def("estimate_cost", &sim::estimate_cost, py::arg("sys"),
        py::arg("policy"), py::arg("dist"), py::arg("x0"), py::arg("T"),
        py::arg("cost"), py::arg("n_runs"), py::arg("seed"),
        py::arg("n_threads") = 1);
  m.def("mean_trajectory", &sim::mean_trajectory);
  m.def("estimate_reliability", &sim::estimate_reliability, py::arg("sys"),
        py::arg("cost"), py::arg("truth"), py::arg("N"), py::arg("theta"),
        py::arg("beta"), py::arg("T"), py::arg("x0"), py::arg("n_trials"),
        py::arg("seed"), py::arg("n_runs_per_trial") = 200);
  m.def("settling_time", &sim::settling_time);
  m.def("control_energy", &sim::control_energy);

  // power grid
  py::class_<powergrid::GridModel>(m, "GridModel")
      .def_readonly("omega_s", &powergrid::GridModel::omega_s)
      .def_readonly("inertia_h", &powergrid::GridModel::inertia_h)
      .def_readonly("damping", &powergrid::GridModel::damping)
      .def_readonly("laplacian", &powergrid::GridModel::laplacian)
      .def_readonly("dt", &powergrid::GridModel::dt)
      .def_property_readonly("n_gen", &powergrid::GridModel::n_gen);

  py::class_<powergrid::DemoScenario>(m, "DemoScenario")
      .def_readonly("sys", &powergrid::DemoScenario::sys)
      .def_readonly("cost", &powergrid::DemoScenario::cost)
      .def_readonly("emp", &powergrid::DemoScenario::emp)
      .def_readonly("x0", &powergrid::DemoScenario::x0)
      .def_readonly("theta", &powergrid::DemoScenario::theta);

  m.def("synthetic10", &powergrid::synthetic10);
  m.def("load_grid_file", &powergrid::load_grid_file);
  m.def("build_state_space", &powergrid::build_state_space);
  m.def("zoh_discretize", &powergrid::zoh_discretize);
  m.def("demo_scenario", &powergrid::demo_scenario, py::arg("grid"),
        py::arg("theta"), py::arg("N"), py::arg("seed"));
}
