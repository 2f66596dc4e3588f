#pragma once

#include <vector>

#include <Eigen/Dense>

#include "rotsync/graph.hpp"
#include "rotsync/matops.hpp"
#include "rotsync/parallel.hpp"

namespace rotsync {

/// An agent's R factor counts as singular when
/// min |diag| <= kSingularRTolRel * max |diag|.
inline constexpr double kSingularRTolRel = 1e-10;

/// State of one agent: the full rotation Q (d x d) and the auxiliary upper
/// triangular factor R (k x k, positive diagonal).
struct AgentState {
  RotationMatrix Q;
  UpperTriPos R;
};

struct SwarmState {
  int n = 0;
  int d = 0;
  int k = 0;
  std::vector<AgentState> agents;
};

/// Checks dimensions and all component invariants; throws
/// std::invalid_argument on violation.
void validate_swarm(const SwarmState& swarm, double orth_tol = kStateOrthTol);

/// All controller quantities of one agent at one instant.
struct ControlOutput {
  Eigen::MatrixXd V;     // d x k
  SkewMatrix U_full;     // d x d
  Eigen::MatrixXd U_k;   // d x k, the first k columns of U_full (bit-equal)
  Eigen::MatrixXd R_dot; // k x k, upper triangular
};

/// Qi^T * (first k columns of Qj): the k observed columns of the relative
/// rotation between frames i and j.
Eigen::MatrixXd relative_rotation_cols(const Eigen::MatrixXd& Qi,
                                       const Eigen::MatrixXd& Qj, int k);

/// Rj * Ri^{-1} computed by a triangular solve against Ri (never forming the
/// inverse). Throws SingularRError (agent index unknown here, reported as -1
/// by the caller's context) when Ri's diagonal has collapsed.
Eigen::MatrixXd relative_r(const Eigen::MatrixXd& Ri, const Eigen::MatrixXd& Rj);

/// V_i = sum over j in N_i of a_ij * (Q_ij R_ji - [I_k, 0]^T), neighbors in
/// ascending index order.
Eigen::MatrixXd compute_V(int i, const SwarmState& swarm,
                          const DirectedWeightedGraph& g);

/// U(d) = [low(V), 0] - [low(V), 0]^T; skew-symmetric exactly.
SkewMatrix compute_U_full(const Eigen::MatrixXd& V);

/// U(k) = low(V) - [I_k,0]^T (low(V)^T [I_k,0]^T); equals the first k
/// columns of compute_U_full(V) bit-for-bit.
Eigen::MatrixXd compute_U_k(const Eigen::MatrixXd& V);

/// R_dot = up((V - U_k) R).
Eigen::MatrixXd compute_R_dot(const Eigen::MatrixXd& V,
                              const Eigen::MatrixXd& U_k,
                              const Eigen::MatrixXd& R);

/// Everything the controller of agent i produces from relative information.
ControlOutput compute_control(int i, const SwarmState& swarm,
                              const DirectedWeightedGraph& g);

struct SwarmDerivative {
  std::vector<Eigen::MatrixXd> dQ; // d x d per agent
  std::vector<Eigen::MatrixXd> dR; // k x k per agent, upper triangular
};

/// The closed-loop vector field: dQ_i = Q_i U_i(d), dR_i = up((V_i - U_i(k)) R_i).
/// Pure function of the state. Agents are evaluated independently; the
/// OpenMP path writes to disjoint slots and is bit-identical to Serial.
/// Throws SingularRError naming the first offending agent (ascending order)
/// if any R_i diagonal has collapsed.
SwarmDerivative closed_loop_derivative(const SwarmState& swarm,
                                       const DirectedWeightedGraph& g,
                                       EvalMode mode = EvalMode::Serial);

} // namespace rotsync
