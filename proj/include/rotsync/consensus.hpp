#pragma once

#include <vector>

#include <Eigen/Dense>

#include "rotsync/graph.hpp"
#include "rotsync/parallel.hpp"

namespace rotsync {

/// Stacked auxiliary states Z_i (each d x k) evolving under the linear
/// consensus protocol. Rank loss of a block is meaningful, not an error,
/// so nothing here enforces full rank.
struct ConsensusState {
  int n = 0;
  int d = 0;
  int k = 0;
  std::vector<Eigen::MatrixXd> Z;
};

void validate_consensus(const ConsensusState& state);

/// dZ_i = sum over j in N_i of a_ij (Z_j - Z_i), neighbors ascending.
/// Equals -(L (x) I_d) applied to the stacked state.
std::vector<Eigen::MatrixXd> consensus_derivative(const ConsensusState& state,
                                                  const DirectedWeightedGraph& g,
                                                  EvalMode mode = EvalMode::Serial);

/// Closed-form flow: Z_i(t) = sum_j [exp(-L t)]_ij Z_j(0). Exponentiates the
/// n x n Laplacian and applies it blockwise, which equals the (nd) x (nd)
/// Kronecker-lifted exponential.
ConsensusState consensus_exact(const ConsensusState& z0,
                               const DirectedWeightedGraph& g, double t);

/// The common limit Z-bar = sum_i w_i Z_i(0), w the normalized left null
/// vector of the Laplacian. Requires a quasi-strongly connected graph
/// (propagates NullSpaceError otherwise).
Eigen::MatrixXd consensus_limit(const ConsensusState& z0,
                                const DirectedWeightedGraph& g);

/// max over pairs (i,j) of ||Z_i - Z_j||_F; non-increasing along consensus
/// trajectories (computable surrogate for convex-hull forward invariance).
double hull_diameter(const ConsensusState& state);

} // namespace rotsync
