#include "rotsync/metrics.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "rotsync/errors.hpp"

namespace rotsync {

SyncReport compute_report(const SwarmTrajectory& traj,
                          const DirectedWeightedGraph& g) {
  SyncReport report;
  report.times = traj.times;
  const std::size_t steps = traj.states.size();
  if (steps == 0) {
    return report;
  }
  const int n = traj.states.front().n;
  const int d = traj.states.front().d;
  const int k = traj.states.front().k;
  report.run_k = k;
  const Eigen::Index t_count = static_cast<Eigen::Index>(steps);

  report.q_sync.assign(static_cast<std::size_t>(d),
                       Eigen::MatrixXd::Zero(n, t_count));
  report.r_sync = Eigen::MatrixXd::Zero(n, t_count);
  report.u_norm = Eigen::MatrixXd::Zero(n, t_count);
  report.rdot_norm = Eigen::MatrixXd::Zero(n, t_count);

  for (Eigen::Index s = 0; s < t_count; ++s) {
    const SwarmState& state = traj.states[static_cast<std::size_t>(s)];
    const AgentState& ref = state.agents.front();
    for (int i = 0; i < n; ++i) {
      const AgentState& a = state.agents[static_cast<std::size_t>(i)];
      for (int c = 1; c <= d; ++c) {
        report.q_sync[static_cast<std::size_t>(c - 1)](i, s) =
            (a.Q.m.leftCols(c) - ref.Q.m.leftCols(c)).norm();
      }
      report.r_sync(i, s) = (a.R.m - ref.R.m).norm();
      try {
        const ControlOutput ctrl = compute_control(i, state, g);
        report.u_norm(i, s) = ctrl.U_k.norm();
        report.rdot_norm(i, s) = ctrl.R_dot.norm();
      } catch (const SingularRError&) {
        // A halted trajectory's last snapshot can hold a collapsed R; the
        // controller is undefined there.
        report.u_norm(i, s) = std::numeric_limits<double>::quiet_NaN();
        report.rdot_norm(i, s) = std::numeric_limits<double>::quiet_NaN();
      }
    }
  }
  report.limit_q_cols = traj.states.back().agents.front().Q.m.leftCols(k);
  return report;
}

ConsensusReport compute_report(const ConsensusTrajectory& traj) {
  ConsensusReport report;
  report.times = traj.times;
  report.diameter.reserve(traj.states.size());
  for (const ConsensusState& state : traj.states) {
    report.diameter.push_back(hull_diameter(state));
  }
  return report;
}

std::optional<double> detect_convergence(const SyncReport& report, double tol,
                                         double dwell) {
  if (!(tol > 0.0) || !(dwell > 0.0)) {
    throw std::invalid_argument("detect_convergence: need tol > 0, dwell > 0");
  }
  const Eigen::Index t_count = static_cast<Eigen::Index>(report.times.size());
  if (t_count == 0 || report.run_k < 1 ||
      static_cast<std::size_t>(report.run_k) > report.q_sync.size()) {
    return std::nullopt;
  }
  // Max disagreement over agents at each snapshot, at the run's k.
  const Eigen::MatrixXd& series =
      report.q_sync[static_cast<std::size_t>(report.run_k - 1)];
  std::vector<double> worst(static_cast<std::size_t>(t_count), 0.0);
  for (Eigen::Index s = 0; s < t_count; ++s) {
    worst[static_cast<std::size_t>(s)] = series.col(s).maxCoeff();
  }
  const double t_end = report.times.back();
  // Scan backward for the earliest suffix that stays below tol.
  Eigen::Index first_ok = t_count;
  for (Eigen::Index s = t_count - 1; s >= 0; --s) {
    if (worst[static_cast<std::size_t>(s)] <= tol) {
      first_ok = s;
    } else {
      break;
    }
  }
  if (first_ok == t_count) {
    return std::nullopt;
  }
  const double t_star = report.times[static_cast<std::size_t>(first_ok)];
  if (t_end - t_star >= dwell) {
    return t_star;
  }
  return std::nullopt;
}

} // namespace rotsync
