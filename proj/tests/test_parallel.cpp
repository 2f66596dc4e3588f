#include <doctest.h>

#include <omp.h>

#include "rotsync/config.hpp"
#include "rotsync/consensus.hpp"
#include "rotsync/controller.hpp"
#include "rotsync/integrator.hpp"
#include "test_support.hpp"

using namespace rotsync;

// The OpenMP kernels must be drop-in replacements for the serial reference:
// same bits out, regardless of scheduling.

TEST_CASE("closed-loop derivative: OpenMP equals serial bit for bit") {
  Rng rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform01() * 30);
    const int d = 2 + static_cast<int>(rng.uniform01() * 4);
    const int k = 1 + static_cast<int>(rng.uniform01() * (d - 1));
    const SwarmState swarm = test::random_swarm(900 + trial, n, d, k);
    const DirectedWeightedGraph g = test::random_strong_graph(n, 2 * n, rng);

    const SwarmDerivative serial = closed_loop_derivative(swarm, g, EvalMode::Serial);
    const SwarmDerivative parallel = closed_loop_derivative(swarm, g, EvalMode::OpenMP);
    for (int i = 0; i < n; ++i) {
      CHECK(serial.dQ[static_cast<std::size_t>(i)] ==
            parallel.dQ[static_cast<std::size_t>(i)]);
      CHECK(serial.dR[static_cast<std::size_t>(i)] ==
            parallel.dR[static_cast<std::size_t>(i)]);
    }
  }
}

TEST_CASE("consensus derivative: OpenMP equals serial bit for bit") {
  Rng rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform01() * 60);
    const ConsensusState state = init_gaussian_z(950 + trial, n, 4, 2);
    const DirectedWeightedGraph g = test::random_strong_graph(n, 2 * n, rng);

    const auto serial = consensus_derivative(state, g, EvalMode::Serial);
    const auto parallel = consensus_derivative(state, g, EvalMode::OpenMP);
    for (int i = 0; i < n; ++i) {
      CHECK(serial[static_cast<std::size_t>(i)] ==
            parallel[static_cast<std::size_t>(i)]);
    }
  }
}

TEST_CASE("whole integration runs agree across eval modes") {
  Rng rng(3);
  const int n = 8;
  const SwarmState swarm0 = test::random_swarm(77, n, 3, 2);
  const DirectedWeightedGraph g = test::random_strong_graph(n, n, rng);
  IntegratorConfig cfg;
  cfg.t_final = 2.0;
  const SwarmTrajectory serial = integrate_closed_loop(swarm0, g, cfg, EvalMode::Serial);
  const SwarmTrajectory parallel = integrate_closed_loop(swarm0, g, cfg, EvalMode::OpenMP);
  REQUIRE(serial.times.size() == parallel.times.size());
  for (std::size_t s = 0; s < serial.times.size(); ++s) {
    CHECK(serial.times[s] == parallel.times[s]);
    CHECK(flatten(serial.states[s]) == flatten(parallel.states[s]));
  }
}

TEST_CASE("thread count does not change the OpenMP kernel output") {
  const int n = 16;
  Rng rng(4);
  const SwarmState swarm = test::random_swarm(88, n, 3, 2);
  const DirectedWeightedGraph g = test::random_strong_graph(n, n, rng);

  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const SwarmDerivative one = closed_loop_derivative(swarm, g, EvalMode::OpenMP);
  omp_set_num_threads(saved > 1 ? saved : 2);
  const SwarmDerivative many = closed_loop_derivative(swarm, g, EvalMode::OpenMP);
  omp_set_num_threads(saved);

  for (int i = 0; i < n; ++i) {
    CHECK(one.dQ[static_cast<std::size_t>(i)] ==
          many.dQ[static_cast<std::size_t>(i)]);
    CHECK(one.dR[static_cast<std::size_t>(i)] ==
          many.dR[static_cast<std::size_t>(i)]);
  }
}
