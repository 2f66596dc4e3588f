#pragma once

// Shared generators for randomized tests. Everything is seeded and
// deterministic; the helpers reuse the library's own init recipes for valid
// states and build independent structures elsewhere.

#include <algorithm>
#include <vector>

#include "rotsync/config.hpp"
#include "rotsync/controller.hpp"
#include "rotsync/graph.hpp"
#include "rotsync/rng.hpp"

namespace rotsync::test {

/// Strongly connected: directed ring plus `extra` random chords, weights
/// uniform(0,1).
inline DirectedWeightedGraph random_strong_graph(int n, int extra, Rng& rng) {
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    edges.push_back(Edge{i, (i + 1) % n, rng.uniform_open(0.0, 1.0)});
  }
  // The ring occupies n of the n(n-1) ordered pairs; cap the request.
  extra = std::min(extra, n * (n - 1) - n);
  int added = 0;
  while (added < extra) {
    const int i = static_cast<int>(rng.uniform01() * n);
    const int j = static_cast<int>(rng.uniform01() * n);
    if (i == j || i >= n || j >= n || j == (i + 1) % n) {
      continue;
    }
    bool dup = false;
    for (const Edge& e : edges) {
      if (e.from == i && e.to == j) {
        dup = true;
        break;
      }
    }
    if (dup) {
      continue;
    }
    edges.push_back(Edge{i, j, rng.uniform_open(0.0, 1.0)});
    ++added;
  }
  return DirectedWeightedGraph(n, edges);
}

/// Quasi-strongly connected draw via the library generator.
inline DirectedWeightedGraph random_qsc_graph(int n, Rng& rng) {
  return make_random_qsc_graph(n, 0.5, rng);
}

/// Random valid swarm state (Gaussian QR recipe).
inline SwarmState random_swarm(std::uint64_t seed, int n, int d, int k) {
  return init_gaussian_qr(seed, n, d, k);
}

/// Swarm where every agent holds the same (Q, R): the synchronization set.
inline SwarmState synchronized_swarm(std::uint64_t seed, int n, int d, int k) {
  SwarmState one = init_gaussian_qr(seed, 1, d, k);
  SwarmState swarm;
  swarm.n = n;
  swarm.d = d;
  swarm.k = k;
  swarm.agents.assign(static_cast<std::size_t>(n), one.agents.front());
  return swarm;
}

/// Random d x d rotation.
inline Eigen::MatrixXd random_rotation(std::uint64_t seed, int d) {
  return init_gaussian_qr(seed, 1, d, d > 1 ? d - 1 : 1).agents.front().Q.m;
}

inline double max_abs(const Eigen::MatrixXd& m) {
  return m.cwiseAbs().maxCoeff();
}

} // namespace rotsync::test
