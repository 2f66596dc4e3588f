#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "rotsync/errors.hpp"
#include "rotsync/graph.hpp"
#include "test_support.hpp"

using namespace rotsync;

TEST_CASE("graph construction validates input") {
  CHECK_THROWS_AS(DirectedWeightedGraph(2, {{0, 0, 1.0}}),
                  std::invalid_argument); // self-loop
  CHECK_THROWS_AS(DirectedWeightedGraph(2, {{0, 1, 0.0}}),
                  std::invalid_argument); // non-positive weight
  CHECK_THROWS_AS(DirectedWeightedGraph(2, {{0, 1, -0.5}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(DirectedWeightedGraph(2, {{0, 2, 1.0}}),
                  std::invalid_argument); // out of range
  CHECK_THROWS_AS(DirectedWeightedGraph(2, {{0, 1, 1.0}, {0, 1, 2.0}}),
                  std::invalid_argument); // duplicate
}

TEST_CASE("quasi-strong connectivity: canned examples") {
  // chain 1 -> 2 -> 3: node 3 is a center
  DirectedWeightedGraph chain(3, {{0, 1, 1.0}, {1, 2, 1.0}});
  CHECK(is_quasi_strongly_connected(chain));

  DirectedWeightedGraph isolated(2, {});
  CHECK_FALSE(is_quasi_strongly_connected(isolated));

  CHECK(is_quasi_strongly_connected(make_complete_graph(5)));

  DirectedWeightedGraph single(1, {});
  CHECK(is_quasi_strongly_connected(single));

  // two sinks, no common center
  DirectedWeightedGraph split(4, {{0, 1, 1.0}, {2, 3, 1.0}});
  CHECK_FALSE(is_quasi_strongly_connected(split));
}

TEST_CASE("quasi-strong connectivity is invariant under relabeling") {
  Rng rng(99);
  std::mt19937 shuffler(1234);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 3 + static_cast<int>(rng.uniform01() * 6);
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i != j && rng.uniform01() < 0.25) {
          edges.push_back(Edge{i, j, rng.uniform_open(0.0, 1.0)});
        }
      }
    }
    DirectedWeightedGraph g(n, edges);
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), shuffler);
    std::vector<Edge> relabeled;
    for (const Edge& e : edges) {
      relabeled.push_back(Edge{perm[static_cast<std::size_t>(e.from)],
                               perm[static_cast<std::size_t>(e.to)], e.weight});
    }
    DirectedWeightedGraph g2(n, relabeled);
    CHECK(is_quasi_strongly_connected(g) == is_quasi_strongly_connected(g2));
  }
}

TEST_CASE("laplacian: canned examples") {
  DirectedWeightedGraph g(2, {{0, 1, 1.0}});
  Eigen::MatrixXd L = laplacian(g);
  CHECK(L(0, 0) == 1.0);
  CHECK(L(0, 1) == -1.0);
  CHECK(L(1, 0) == 0.0);
  CHECK(L(1, 1) == 0.0);

  CHECK(laplacian(DirectedWeightedGraph(3, {})).isZero(0.0));

  Eigen::MatrixXd L2 = laplacian(make_complete_graph(2));
  CHECK(L2(0, 0) == 1.0);
  CHECK(L2(0, 1) == -1.0);
  CHECK(L2(1, 0) == -1.0);
  CHECK(L2(1, 1) == 1.0);
}

TEST_CASE("laplacian rows sum to zero") {
  Rng rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform01() * 8);
    const DirectedWeightedGraph g = test::random_strong_graph(n, n, rng);
    const Eigen::VectorXd sums = laplacian(g).rowwise().sum();
    CHECK(sums.cwiseAbs().maxCoeff() <= 1e-12);
  }
  // Integer weights: exact zero.
  const Eigen::VectorXd sums = laplacian(make_complete_graph(6)).rowwise().sum();
  CHECK(sums.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("left_null_vector: canned examples") {
  // 1 -> 2: node 2 is the sink, w = (0, 1)
  Eigen::VectorXd w = left_null_vector(laplacian(
      DirectedWeightedGraph(2, {{0, 1, 1.0}})));
  CHECK(std::abs(w(0) - 0.0) <= 1e-12);
  CHECK(std::abs(w(1) - 1.0) <= 1e-12);

  // symmetric pair: w = (1/2, 1/2)
  w = left_null_vector(laplacian(make_complete_graph(2)));
  CHECK(std::abs(w(0) - 0.5) <= 1e-12);
  CHECK(std::abs(w(1) - 0.5) <= 1e-12);
}

TEST_CASE("left_null_vector matches the long-horizon transition matrix") {
  // Oracle: rows of exp(-L t) converge to w^T as t grows; compare at t = 1e3.
  Rng rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 5;
    const DirectedWeightedGraph g = test::random_strong_graph(n, 6, rng);
    const Eigen::MatrixXd L = laplacian(g);
    const Eigen::VectorXd w = left_null_vector(L);

    const Eigen::MatrixXd limit = (-L * 1e3).exp();
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        CHECK(std::abs(limit(i, j) - w(j)) <= 1e-8);
      }
    }
  }
}

TEST_CASE("left_null_vector annihilates L") {
  Rng rng(33);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform01() * 9);
    const DirectedWeightedGraph g = test::random_strong_graph(n, n / 2, rng);
    const Eigen::MatrixXd L = laplacian(g);
    const Eigen::VectorXd w = left_null_vector(L);
    CHECK((w.transpose() * L).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(w.minCoeff() >= 0.0);
    CHECK(std::abs(w.sum() - 1.0) <= 1e-14);
  }
}

TEST_CASE("left_null_vector rejects graphs without a one-dimensional kernel") {
  // Two disconnected symmetric pairs: kernel dimension 2.
  DirectedWeightedGraph g(4, {{0, 1, 1.0}, {1, 0, 1.0}, {2, 3, 1.0}, {3, 2, 1.0}});
  CHECK_THROWS_AS(left_null_vector(laplacian(g)), NullSpaceError);
}
