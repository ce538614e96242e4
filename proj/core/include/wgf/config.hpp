#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wgf/env.hpp"
#include "wgf/grid.hpp"
#include "wgf/trajopt.hpp"
#include "wgf/world_model.hpp"

namespace wgf {

/// Fully resolved run description: command and environment from the CLI,
/// every hyperparameter either from the key=value config file or from the
/// documented defaults.
struct RunConfig {
  std::string command;           // grid | traj | wm | verify
  std::string env_name = "scalar";
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::vector<std::string> checks;  // verify only; empty = all

  ScalarRegulatorParams scalar;
  PendulumParams pendulum;
  OscillatorParams oscillators;

  PolicyIterationConfig grid;
  OptimizerConfig traj;
  std::vector<int> hidden;       // policy network widths
  JointTrainConfig wm;

  struct VerifySettings {
    std::size_t contraction_trials = 100;
    std::size_t contraction_samples = 64;
    std::size_t contraction_horizon = 1;
    std::size_t doeblin_m = 1;
  } verify;

  /// The subset of keys the config file actually set, echoed to summaries.
  std::vector<std::pair<std::string, std::string>> overrides;

  EnvModel make_env() const;
};

/// Parses a flat key=value file ('#' comments, blank lines allowed). Unknown
/// keys fail with their line number; all range violations are reported in a
/// single error. Values not present fall back to the environment-specific
/// defaults, which resolve() applies once command and env are known.
RunConfig load_config(const std::string& path);
RunConfig parse_config_text(const std::string& text);

/// Applies command/env-dependent defaults for everything the file left
/// unset, then validates cross-field constraints (e.g. the grid command
/// rejects the 10-dimensional oscillator chain).
void resolve(RunConfig& config);

}  // namespace wgf
