#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "wlqc/model.hpp"
#include "wlqc/powergrid.hpp"
#include "wlqc/simulator.hpp"

namespace wlqc::scenario {

// Fully built experiment description.  Parsed from the structured-text
// scenario format documented in docs/formats.md; exactly one penalty mode,
// one system source and one sample source per file.
struct Scenario {
  enum class Mode { Finite, Infinite };

  Mode mode = Mode::Finite;
  int horizon = 1;

  bool tune = false;      // tune-mode: theta/beta set; else lambda fixed
  double lambda = 0.0;
  double theta = 0.0;
  double beta = 0.05;

  LinearSystem sys;
  std::optional<powergrid::GridModel> grid;  // set when system came from a file

  CostSpec cost;
  EmpiricalDistribution emp;
  // Set for `samples gaussian ...`; doubles as the unknown true
  // distribution in reliability experiments.
  std::optional<sim::GaussianSpec> sample_spec;

  Eigen::VectorXd x0;
  std::uint64_t seed = 0;

  std::uint64_t source_hash = 0;  // fnv1a-64 of the scenario file bytes
};

// Parses and materializes a scenario; `seed_override` replaces the file's
// seed before Gaussian samples are drawn.  Relative grid-file references
// resolve against the scenario's own directory when not found from the
// working directory.
Scenario load_scenario(const std::string& path,
                       std::optional<std::uint64_t> seed_override = {});

Scenario parse_scenario_text(const std::string& text,
                             std::optional<std::uint64_t> seed_override = {},
                             const std::string& base_dir = {});

}  // namespace wlqc::scenario
