#include "rotsync/controller.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "rotsync/errors.hpp"

namespace rotsync {

namespace {

bool r_diag_singular(const Eigen::MatrixXd& r) {
  double lo = std::abs(r(0, 0));
  double hi = lo;
  for (Eigen::Index j = 1; j < r.cols(); ++j) {
    const double a = std::abs(r(j, j));
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  }
  return lo <= kSingularRTolRel * hi;
}

} // namespace

void validate_swarm(const SwarmState& swarm, double orth_tol) {
  if (swarm.d < 2 || swarm.k < 1 || swarm.k > swarm.d - 1) {
    throw std::invalid_argument("swarm: need d >= 2 and 1 <= k <= d-1");
  }
  if (swarm.n < 1 || static_cast<int>(swarm.agents.size()) != swarm.n) {
    throw std::invalid_argument("swarm: agent count mismatch");
  }
  for (int i = 0; i < swarm.n; ++i) {
    const AgentState& a = swarm.agents[static_cast<std::size_t>(i)];
    if (a.Q.m.rows() != swarm.d || a.Q.m.cols() != swarm.d ||
        a.R.m.rows() != swarm.k || a.R.m.cols() != swarm.k) {
      throw std::invalid_argument("swarm: agent " + std::to_string(i + 1) +
                                  " has wrong dimensions");
    }
    const double err = orth_error(a.Q.m);
    if (err > orth_tol) {
      throw std::invalid_argument("swarm: agent " + std::to_string(i + 1) +
                                  " Q off SO(d), error " + std::to_string(err));
    }
    if (std::abs(a.Q.m.determinant() - 1.0) > std::max(orth_tol, 1e-8)) {
      throw std::invalid_argument("swarm: agent " + std::to_string(i + 1) +
                                  " Q determinant not +1");
    }
    if (!is_upper_tri_pos(a.R.m)) {
      throw std::invalid_argument("swarm: agent " + std::to_string(i + 1) +
                                  " R not upper triangular positive");
    }
  }
}

Eigen::MatrixXd relative_rotation_cols(const Eigen::MatrixXd& Qi,
                                       const Eigen::MatrixXd& Qj, int k) {
  return Qi.transpose() * Qj.leftCols(k);
}

Eigen::MatrixXd relative_r(const Eigen::MatrixXd& Ri,
                           const Eigen::MatrixXd& Rj) {
  if (r_diag_singular(Ri)) {
    throw SingularRError(-1);
  }
  return Ri.triangularView<Eigen::Upper>().solve<Eigen::OnTheRight>(Rj);
}

Eigen::MatrixXd compute_V(int i, const SwarmState& swarm,
                          const DirectedWeightedGraph& g) {
  const int d = swarm.d;
  const int k = swarm.k;
  const AgentState& self = swarm.agents[static_cast<std::size_t>(i)];
  Eigen::MatrixXd ik = Eigen::MatrixXd::Zero(d, k);
  ik.topRows(k) = Eigen::MatrixXd::Identity(k, k);
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(d, k);
  for (const auto& [j, weight] : g.neighbors(i)) {
    const AgentState& other = swarm.agents[static_cast<std::size_t>(j)];
    const Eigen::MatrixXd q_ij =
        relative_rotation_cols(self.Q.m, other.Q.m, k);
    const Eigen::MatrixXd r_ji = relative_r(self.R.m, other.R.m);
    v += weight * (q_ij * r_ji - ik);
  }
  return v;
}

SkewMatrix compute_U_full(const Eigen::MatrixXd& V) {
  const Eigen::Index d = V.rows();
  Eigen::MatrixXd padded = Eigen::MatrixXd::Zero(d, d);
  padded.leftCols(V.cols()) = low(V);
  // Entrywise a_ij - a_ji: skew-symmetry holds bit-for-bit.
  return SkewMatrix{padded - padded.transpose()};
}

Eigen::MatrixXd compute_U_k(const Eigen::MatrixXd& V) {
  const Eigen::Index k = V.cols();
  const Eigen::MatrixXd lo = low(V);
  // low(V)^T [I_k, 0]^T is the transpose of low(V)'s top k x k block.
  Eigen::MatrixXd out = lo;
  out.topRows(k) -= lo.topRows(k).transpose();
  return out;
}

Eigen::MatrixXd compute_R_dot(const Eigen::MatrixXd& V,
                              const Eigen::MatrixXd& U_k,
                              const Eigen::MatrixXd& R) {
  return up((V - U_k) * R);
}

ControlOutput compute_control(int i, const SwarmState& swarm,
                              const DirectedWeightedGraph& g) {
  ControlOutput out;
  out.V = compute_V(i, swarm, g);
  out.U_full = compute_U_full(out.V);
  out.U_k = compute_U_k(out.V);
  out.R_dot =
      compute_R_dot(out.V, out.U_k, swarm.agents[static_cast<std::size_t>(i)].R.m);
  return out;
}

SwarmDerivative closed_loop_derivative(const SwarmState& swarm,
                                       const DirectedWeightedGraph& g,
                                       EvalMode mode) {
  const int n = swarm.n;
  // Scan ascending so the reported agent is deterministic.
  for (int i = 0; i < n; ++i) {
    if (r_diag_singular(swarm.agents[static_cast<std::size_t>(i)].R.m)) {
      throw SingularRError(i);
    }
  }
  SwarmDerivative deriv;
  deriv.dQ.resize(static_cast<std::size_t>(n));
  deriv.dR.resize(static_cast<std::size_t>(n));
  if (mode == EvalMode::OpenMP) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
      const ControlOutput c = compute_control(i, swarm, g);
      deriv.dQ[static_cast<std::size_t>(i)] =
          swarm.agents[static_cast<std::size_t>(i)].Q.m * c.U_full.m;
      deriv.dR[static_cast<std::size_t>(i)] = c.R_dot;
    }
  } else {
    for (int i = 0; i < n; ++i) {
      const ControlOutput c = compute_control(i, swarm, g);
      deriv.dQ[static_cast<std::size_t>(i)] =
          swarm.agents[static_cast<std::size_t>(i)].Q.m * c.U_full.m;
      deriv.dR[static_cast<std::size_t>(i)] = c.R_dot;
    }
  }
  return deriv;
}

} // namespace rotsync
