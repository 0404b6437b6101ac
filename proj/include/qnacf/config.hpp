#pragma once

// JSON config files for experiments and simulations. Field reference: docs/config.md.

#include <cstddef>
#include <cstdint>
#include <string>

#include "qnacf/harness.hpp"
#include "qnacf/procgen.hpp"

namespace qnacf {

struct SimulationConfig {
  ProcessSpec process;
  OutlierSpec outliers;
  std::size_t n = 500;
  std::uint64_t seed = 1;
};

/// Unknown keys and wrongly typed values raise ValidationError naming the field.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);

SimulationConfig parse_simulation_config(const std::string& json_text);
SimulationConfig load_simulation_config(const std::string& path);

/// Round-trippable JSON text of the config (parse_experiment_config accepts it).
std::string experiment_config_json(const ExperimentConfig& config, int indent = 2);
std::string simulation_config_json(const SimulationConfig& config, int indent = 2);

}  // namespace qnacf
