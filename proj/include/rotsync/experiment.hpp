#pragma once

#include <optional>
#include <string>

#include "rotsync/config.hpp"
#include "rotsync/integrator.hpp"
#include "rotsync/metrics.hpp"

namespace rotsync {

/// Convergence detection defaults (below the resolution anything downstream
/// plots; the dwell guards against transient dips).
inline constexpr double kConvergenceTol = 1e-6;
inline constexpr double kConvergenceDwell = 1.0;

struct RunOutcome {
  int exit_code = 0; ///< 0 ok, 2 config, 3 singular R, 4 integrator failure
  RunStatus status = RunStatus::Completed;
  std::optional<double> converged_at;
};

/// Executes cfg.mode and writes the output files under cfg.output_dir:
/// trajectory.csv, metrics.csv, summary.json; deviation.csv additionally in
/// equivalence mode; per-seed subdirectories plus aggregate.json in
/// monte_carlo mode. Config errors surface as ConfigError (callers map them
/// to exit code 2); integration failures are reported in the outcome, not
/// thrown.
RunOutcome run_experiment(const ExperimentConfig& cfg);

} // namespace rotsync
