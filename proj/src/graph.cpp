#include "rotsync/graph.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>

#include <Eigen/SVD>

#include "rotsync/errors.hpp"

namespace rotsync {

DirectedWeightedGraph::DirectedWeightedGraph(int node_count,
                                             std::vector<Edge> edges)
    : n_(node_count), edges_(std::move(edges)) {
  if (n_ < 1) {
    throw std::invalid_argument("graph must have at least one node");
  }
  std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.from, a.to) < std::tie(b.from, b.to);
  });
  adj_.assign(static_cast<std::size_t>(n_), {});
  std::set<std::pair<int, int>> seen;
  for (const Edge& e : edges_) {
    if (e.from < 0 || e.from >= n_ || e.to < 0 || e.to >= n_) {
      throw std::invalid_argument("edge (" + std::to_string(e.from + 1) + "," +
                                  std::to_string(e.to + 1) +
                                  ") out of range for n=" + std::to_string(n_));
    }
    if (e.from == e.to) {
      throw std::invalid_argument("self-loop at node " +
                                  std::to_string(e.from + 1));
    }
    if (!(e.weight > 0.0)) {
      throw std::invalid_argument("edge weight must be > 0, got " +
                                  std::to_string(e.weight));
    }
    if (!seen.insert({e.from, e.to}).second) {
      throw std::invalid_argument("duplicate edge (" +
                                  std::to_string(e.from + 1) + "," +
                                  std::to_string(e.to + 1) + ")");
    }
    adj_[static_cast<std::size_t>(e.from)].emplace_back(e.to, e.weight);
  }
  // edges_ is sorted, so each adjacency list is already ascending by index.
}

bool is_quasi_strongly_connected(const DirectedWeightedGraph& g) {
  const int n = g.node_count();
  if (n == 1) {
    return true;
  }
  // Reverse adjacency: reached[j] via reverse edges from c means j -> c
  // exists in the forward graph.
  std::vector<std::vector<int>> radj(static_cast<std::size_t>(n));
  for (const Edge& e : g.edges()) {
    radj[static_cast<std::size_t>(e.to)].push_back(e.from);
  }
  std::vector<char> visited(static_cast<std::size_t>(n));
  std::vector<int> stack;
  for (int c = 0; c < n; ++c) {
    std::fill(visited.begin(), visited.end(), 0);
    stack.assign(1, c);
    visited[static_cast<std::size_t>(c)] = 1;
    int count = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v : radj[static_cast<std::size_t>(u)]) {
        if (!visited[static_cast<std::size_t>(v)]) {
          visited[static_cast<std::size_t>(v)] = 1;
          ++count;
          stack.push_back(v);
        }
      }
    }
    if (count == n) {
      return true;
    }
  }
  return false;
}

Eigen::MatrixXd laplacian(const DirectedWeightedGraph& g) {
  const int n = g.node_count();
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (const auto& [j, w] : g.neighbors(i)) {
      L(i, i) += w;
      L(i, j) -= w;
    }
  }
  return L;
}

Eigen::VectorXd left_null_vector(const Eigen::MatrixXd& L) {
  const Eigen::Index n = L.rows();
  if (L.cols() != n || n < 1) {
    throw std::invalid_argument("left_null_vector: L must be square");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(L, Eigen::ComputeFullU);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const double tol = 1e-10 * sigma(0);
  int nullity = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (sigma(i) <= tol) {
      ++nullity;
    }
  }
  if (n == 1) {
    return Eigen::VectorXd::Ones(1);
  }
  if (nullity != 1) {
    throw NullSpaceError("null space of L^T has dimension " +
                         std::to_string(nullity) + ", expected 1");
  }
  // Columns of U with zero singular value span ker(L^T) since L^T = V S U^T.
  Eigen::VectorXd w = svd.matrixU().col(n - 1);
  const double total = w.sum();
  if (total < 0.0) {
    w = -w;
  }
  // Clamp round-off negatives; the exact vector is nonnegative for
  // quasi-strongly connected graphs.
  w = w.cwiseMax(0.0);
  w /= w.sum();
  return w;
}

} // namespace rotsync
