#pragma once

#include <sstream>

#include "ombrl/config.hpp"

// A small SynthRkhs experiment that runs in well under a second.
inline ombrl::ExperimentConfig tiny_config(int episodes = 4,
                                          ombrl::LambdaMode mode = ombrl::LambdaMode::Fixed) {
  std::istringstream in(R"(
[env]
kind = synth_rkhs
horizon = 6
noise_std = 0.01
decay_start = 2
synth_centers = 6
synth_base_norm = 0.8
synth_drift_norm = 0.2
[kernel]
lengthscale = 0.5
[calibration]
noise_std = 0.05
[planner]
plan_horizon = 3
population = 8
elites = 2
iterations = 2
mc_rollouts = 1
replan_every = 2
lambda_mode = fixed
lambda = 0.2
[forgetting]
reset_period = 2
window_size = 3
[experiment]
seeds = 0,1
)");
  ombrl::ExperimentConfig cfg = ombrl::parse_config(in, "tiny");
  cfg.episodes = episodes;
  cfg.planner.lambda_mode = mode;
  return cfg;
}
