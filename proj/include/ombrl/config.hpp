#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "ombrl/buffer.hpp"
#include "ombrl/envs.hpp"
#include "ombrl/gp_core.hpp"
#include "ombrl/planner.hpp"

namespace ombrl {

/// Search budget of the true-dynamics planner that estimates J(pi*_n, f*_n).
struct OracleBudget {
  int population = 0;
  int cem_iterations = 0;
  int plan_horizon = 0;
};

struct ExperimentConfig {
  std::string name = "experiment";
  EnvSpec env;
  KernelSpec kernel;
  InputTransform model_inputs;
  CalibrationParams calibration;
  PlanConfig planner;
  int reset_period = 20;
  int window_size = 20;
  std::vector<ForgettingPolicy> methods;
  int episodes = 1;
  std::vector<std::uint64_t> seeds{0};
  OracleBudget oracle;
  std::string output_dir = "out";
  bool record_wall_time = false;

  /// Calibration constants for one forgetting policy. The no-forgetting
  /// baseline uses the stationary (reset-form) confidence multiplier.
  CalibrationParams calibration_for(const ForgettingPolicy& policy) const;

  /// Planner settings of the oracle: same planner with the oracle budget.
  PlanConfig oracle_plan_config() const;

  /// Throws ConfigError listing every offending field.
  void validate() const;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

/// Parse the sectioned key-value format ([env], [kernel], [calibration],
/// [planner], [forgetting], [experiment]). Unknown sections or keys are errors.
ExperimentConfig parse_config(std::istream& in, const std::string& name = "experiment");

/// Accepts a file path or the name of a bundled config (e.g. "pendulum_medium").
std::string resolve_config_path(const std::string& path_or_name);
ExperimentConfig load_config(const std::string& path_or_name);

/// "none" | "reset" | "window" | "all" (comma separated) into policies using
/// the given reset period and window size.
std::vector<ForgettingPolicy> parse_methods(const std::string& spec, int reset_period,
                                            int window_size);

}  // namespace ombrl
