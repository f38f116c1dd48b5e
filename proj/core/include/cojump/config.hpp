#ifndef COJUMP_CONFIG_HPP
#define COJUMP_CONFIG_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "cojump/models.hpp"

namespace cojump {

enum class ModelKind { bivariate_death, multistrain_sir };

/// A fully parsed run configuration. Model parameters come from sections
/// [model], [params], [init] and [noise] (field names mirror the parameter
/// structs); run settings live in [run] and may be overridden by CLI flags.
/// Unknown sections or keys are errors. The seed is mandatory, either here
/// or on the command line; there is no wall-clock default.
struct RunConfig {
  ModelKind model = ModelKind::bivariate_death;
  BivariateDeathParams bivariate;
  SirParams sir;
  std::map<std::string, Count> init;

  std::optional<std::uint64_t> seed;
  std::optional<double> t_end;
  std::uint64_t replicates = 1;
  unsigned threads = 0;
  std::string output_dir = ".";

  const char* model_name() const {
    return model == ModelKind::bivariate_death ? "bivariate_death" : "multistrain_sir";
  }
};

/// Parses the configuration text; throws ConfigError with a line reference
/// on syntax errors, unknown keys, or inconsistent values.
RunConfig parse_run_config(const std::string& text);

RunConfig load_run_config(const std::string& path);

/// Builds the configured system.
SystemSpec build_system(const RunConfig& config);

/// Initial state from the [init] section, validated against the spec.
StateVector initial_state(const RunConfig& config, const SystemSpec& spec);

}  // namespace cojump

#endif  // COJUMP_CONFIG_HPP
