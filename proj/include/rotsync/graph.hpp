#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace rotsync {

/// Directed edge with positive weight. Node indices are 0-based internally;
/// external file formats use 1-based labels and convert on the way in.
struct Edge {
  int from = 0;
  int to = 0;
  double weight = 1.0;

  bool operator==(const Edge&) const = default;
};

/// Directed weighted interaction graph. An edge (i, j) with weight a_ij > 0
/// puts j in the neighborhood N_i, i.e. agent i observes agent j.
///
/// Immutable after construction; safe to share across parallel workers.
class DirectedWeightedGraph {
public:
  /// Validates: indices in range, no self-loops, no duplicate edges, all
  /// weights > 0. Throws std::invalid_argument otherwise.
  DirectedWeightedGraph(int node_count, std::vector<Edge> edges);

  int node_count() const { return n_; }

  /// Neighbors of node i as (index, weight), sorted ascending by index.
  /// The sort order fixes the floating-point accumulation order of every
  /// neighbor sum.
  const std::vector<std::pair<int, double>>& neighbors(int i) const {
    return adj_[static_cast<std::size_t>(i)];
  }

  /// All edges, sorted by (from, to).
  const std::vector<Edge>& edges() const { return edges_; }

  bool operator==(const DirectedWeightedGraph& other) const {
    return n_ == other.n_ && edges_ == other.edges_;
  }

private:
  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::pair<int, double>>> adj_;
};

/// True iff the graph has a center: a node reachable by a directed path
/// from every other node, paths following edge direction (i, j): i -> j.
bool is_quasi_strongly_connected(const DirectedWeightedGraph& g);

/// Weighted graph Laplacian: [L]_ii = sum of a_ij over j in N_i,
/// [L]_ij = -a_ij on edges, 0 elsewhere. Rows sum to zero.
Eigen::MatrixXd laplacian(const DirectedWeightedGraph& g);

/// The normalized left null vector of L: w >= 0, w^T L = 0, sum(w) = 1.
/// Unique when L comes from a quasi-strongly connected graph. Throws
/// NullSpaceError if the null space of L^T is not one-dimensional (rank
/// decided at 1e-10 relative to the largest singular value).
Eigen::VectorXd left_null_vector(const Eigen::MatrixXd& L);

} // namespace rotsync
