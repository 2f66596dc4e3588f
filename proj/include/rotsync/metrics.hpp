#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "rotsync/integrator.hpp"

namespace rotsync {

/// Synchronization diagnostics along a closed-loop trajectory. Agent 1
/// (index 0) is the reference for the disagreement series.
struct SyncReport {
  std::vector<double> times;
  int run_k = 0; ///< the trajectory's synchronized column count
  /// q_sync[c - 1] is an n x T matrix: ||Q_i(t, c) - Q_1(t, c)||_F for the
  /// first c columns, c = 1..d. The run's own k is one of these; larger c
  /// witness that the remaining columns follow when k = d-1.
  std::vector<Eigen::MatrixXd> q_sync;
  Eigen::MatrixXd r_sync;    ///< n x T, ||R_i - R_1||_F
  Eigen::MatrixXd u_norm;    ///< n x T, ||U_i(t,k)||_F
  Eigen::MatrixXd rdot_norm; ///< n x T, ||R_dot_i(t,k)||_F
  std::optional<double> converged_at;
  Eigen::MatrixXd limit_q_cols; ///< d x k columns of the reference agent at t_final
};

/// Diagnostics for a consensus trajectory: the pairwise Frobenius diameter.
struct ConsensusReport {
  std::vector<double> times;
  std::vector<double> diameter;
};

/// Evaluates every series at every snapshot. Control norms are recomputed
/// from the recorded states (the derivative is a pure function of the
/// state); at a snapshot whose R factor has collapsed (the last snapshot of
/// a SingularR-halted run) they are NaN.
SyncReport compute_report(const SwarmTrajectory& traj,
                          const DirectedWeightedGraph& g);

ConsensusReport compute_report(const ConsensusTrajectory& traj);

/// Earliest recorded time t* with max-over-agents q_sync error at the run's
/// k <= tol at t* and at every later recorded time, sustained for a window
/// of at least `dwell` time units (i.e. last_time - t* >= dwell). Empty if
/// never satisfied. Column counts below k are submatrices and dominated;
/// counts above k are not part of the target.
std::optional<double> detect_convergence(const SyncReport& report, double tol,
                                         double dwell);

} // namespace rotsync
