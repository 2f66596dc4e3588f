#pragma once

#include <vector>

#include <Eigen/Dense>

#include "rotsync/consensus.hpp"
#include "rotsync/controller.hpp"
#include "rotsync/rng.hpp"

namespace rotsync {

/// Adaptive Runge-Kutta configuration (Dormand-Prince 5(4), PI step control).
struct IntegratorConfig {
  double rel_tol = 1e-6;
  double abs_tol = 1e-9;
  double h_init = 1e-3;
  double h_min = 1e-12;
  double h_max = 0.0; ///< <= 0 means auto: t_final / 10
  double t_final = 10.0;
  double reproject_threshold = 1e-9;
  int record_stride = 1; ///< snapshot every m-th accepted step

  bool operator==(const IntegratorConfig&) const = default;
};

/// Throws std::invalid_argument on violated invariants.
void validate(const IntegratorConfig& cfg);
double resolved_h_max(const IntegratorConfig& cfg);

enum class EventKind { SingularR, StepUnderflow };

struct Event {
  double time = 0.0;
  EventKind kind = EventKind::SingularR;
  int agent = -1; ///< 0-based; -1 when not agent-attributable
};

enum class RunStatus { Completed, SingularR, StepUnderflow };

template <class StateT> struct Trajectory {
  std::vector<double> times; ///< strictly increasing
  std::vector<StateT> states;
  std::vector<Event> events;
  RunStatus status = RunStatus::Completed;
};

using SwarmTrajectory = Trajectory<SwarmState>;
using ConsensusTrajectory = Trajectory<ConsensusState>;

// Flattened state layout (fixed; also the column order of trajectory.csv):
// agents in index order; per agent, Q entries in column-major order followed
// by the R upper triangle in row-major order. Consensus states stack each
// Z_i in column-major order.
int swarm_flat_size(int n, int d, int k);
int consensus_flat_size(int n, int d, int k);
Eigen::VectorXd flatten(const SwarmState& swarm);
Eigen::VectorXd flatten(const ConsensusState& state);
SwarmState unflatten_swarm(const Eigen::VectorXd& y, int n, int d, int k);
ConsensusState unflatten_consensus(const Eigen::VectorXd& y, int n, int d,
                                   int k);

/// Integrates the closed loop from swarm0 to cfg.t_final. After each
/// accepted step every Q_i whose orthogonality drift exceeds
/// cfg.reproject_threshold is replaced by its polar projection; R factors
/// carry no strictly-lower entries in the flattened state, so they stay
/// exactly triangular. Halts early on a SingularR or StepUnderflow event
/// (recorded in the result, status set accordingly).
SwarmTrajectory integrate_closed_loop(const SwarmState& swarm0,
                                      const DirectedWeightedGraph& g,
                                      const IntegratorConfig& cfg,
                                      EvalMode mode = EvalMode::Serial);

/// Same scheme for the linear consensus protocol; no reprojection.
ConsensusTrajectory integrate_consensus(const ConsensusState& z0,
                                        const DirectedWeightedGraph& g,
                                        const IntegratorConfig& cfg,
                                        EvalMode mode = EvalMode::Serial);

struct EquivalenceResult {
  SwarmTrajectory swarm;
  ConsensusTrajectory consensus;
  /// Per recorded snapshot: max_i ||Q_i(:,1:k) R_i - Z_i||_F.
  std::vector<double> deviation;
  double sup_deviation = 0.0;
};

/// Builds the swarm initial condition from Z0 (factorize each block, extend
/// the orthonormal part to a rotation using completion_rng), then integrates
/// the closed loop and the consensus protocol as one stacked system so both
/// share every accepted step and snapshot time. Requires every Z0 block to
/// have full column rank (throws RankDeficientError otherwise).
EquivalenceResult equivalence_run(const ConsensusState& z0,
                                  const DirectedWeightedGraph& g,
                                  const IntegratorConfig& cfg,
                                  Rng& completion_rng,
                                  EvalMode mode = EvalMode::Serial);

} // namespace rotsync
