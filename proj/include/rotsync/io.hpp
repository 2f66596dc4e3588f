#pragma once

#include <string>
#include <vector>

#include "rotsync/config.hpp"
#include "rotsync/integrator.hpp"
#include "rotsync/metrics.hpp"

#include <json.hpp>

namespace rotsync {

/// Decimal formatting used in every CSV: 17 significant digits, which
/// round-trips binary64 exactly.
std::string format_g17(double x);

std::string status_to_string(RunStatus s);

// trajectory.csv: header, then one row per snapshot: time, then per agent
// the Q entries in column-major order and the R upper triangle in row-major
// order (the flattened state layout). Consensus trajectories stack each Z_i
// in column-major order instead.
void write_trajectory_csv(const std::string& path, const SwarmTrajectory& traj);
void write_trajectory_csv(const std::string& path,
                          const ConsensusTrajectory& traj);

SwarmTrajectory read_swarm_trajectory_csv(const std::string& path, int n,
                                          int d, int k);

/// Initial state for init = from_file: the last data row of a swarm
/// trajectory CSV (so a previous run's output can seed a new run).
SwarmState read_swarm_state_csv(const std::string& path, int n, int d, int k);

// metrics.csv: time, per-agent q sync error at the run's k, per-agent r
// sync error, per-agent ||U_i||_F, per-agent ||R_dot_i||_F.
void write_metrics_csv(const std::string& path, const SyncReport& report,
                       int run_k);
/// Consensus runs: time, hull diameter.
void write_metrics_csv(const std::string& path, const ConsensusReport& report);

void write_deviation_csv(const std::string& path,
                         const std::vector<double>& times,
                         const std::vector<double>& deviation);

nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j);

nlohmann::json graph_to_json(const DirectedWeightedGraph& g);
nlohmann::json events_to_json(const std::vector<Event>& events);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

} // namespace rotsync
