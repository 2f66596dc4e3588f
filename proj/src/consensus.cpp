#include "rotsync/consensus.hpp"

#include <stdexcept>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

namespace rotsync {

void validate_consensus(const ConsensusState& state) {
  if (state.n < 1 || state.d < 1 || state.k < 1) {
    throw std::invalid_argument("consensus state: bad dimensions");
  }
  if (static_cast<int>(state.Z.size()) != state.n) {
    throw std::invalid_argument("consensus state: block count mismatch");
  }
  for (const Eigen::MatrixXd& z : state.Z) {
    if (z.rows() != state.d || z.cols() != state.k) {
      throw std::invalid_argument("consensus state: block dimension mismatch");
    }
  }
}

std::vector<Eigen::MatrixXd> consensus_derivative(const ConsensusState& state,
                                                  const DirectedWeightedGraph& g,
                                                  EvalMode mode) {
  const int n = state.n;
  if (g.node_count() != n) {
    throw std::invalid_argument("consensus_derivative: graph size mismatch");
  }
  std::vector<Eigen::MatrixXd> deriv(static_cast<std::size_t>(n));
  if (mode == EvalMode::OpenMP) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
      Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(state.d, state.k);
      for (const auto& [j, w] : g.neighbors(i)) {
        acc += w * (state.Z[static_cast<std::size_t>(j)] -
                    state.Z[static_cast<std::size_t>(i)]);
      }
      deriv[static_cast<std::size_t>(i)] = std::move(acc);
    }
  } else {
    for (int i = 0; i < n; ++i) {
      Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(state.d, state.k);
      for (const auto& [j, w] : g.neighbors(i)) {
        acc += w * (state.Z[static_cast<std::size_t>(j)] -
                    state.Z[static_cast<std::size_t>(i)]);
      }
      deriv[static_cast<std::size_t>(i)] = std::move(acc);
    }
  }
  return deriv;
}

ConsensusState consensus_exact(const ConsensusState& z0,
                               const DirectedWeightedGraph& g, double t) {
  if (t < 0.0) {
    throw std::invalid_argument("consensus_exact: need t >= 0");
  }
  const int n = z0.n;
  const Eigen::MatrixXd transition = (-laplacian(g) * t).exp();
  ConsensusState out = z0;
  for (int i = 0; i < n; ++i) {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(z0.d, z0.k);
    for (int j = 0; j < n; ++j) {
      acc += transition(i, j) * z0.Z[static_cast<std::size_t>(j)];
    }
    out.Z[static_cast<std::size_t>(i)] = std::move(acc);
  }
  return out;
}

Eigen::MatrixXd consensus_limit(const ConsensusState& z0,
                                const DirectedWeightedGraph& g) {
  const Eigen::VectorXd w = left_null_vector(laplacian(g));
  Eigen::MatrixXd zbar = Eigen::MatrixXd::Zero(z0.d, z0.k);
  for (int i = 0; i < z0.n; ++i) {
    zbar += w(i) * z0.Z[static_cast<std::size_t>(i)];
  }
  return zbar;
}

double hull_diameter(const ConsensusState& state) {
  double diam = 0.0;
  for (int i = 0; i < state.n; ++i) {
    for (int j = i + 1; j < state.n; ++j) {
      diam = std::max(diam, (state.Z[static_cast<std::size_t>(i)] -
                             state.Z[static_cast<std::size_t>(j)])
                                .norm());
    }
  }
  return diam;
}

} // namespace rotsync
