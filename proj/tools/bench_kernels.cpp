// Benchmark: serial reference vs OpenMP per-agent derivative kernels.
//
// The closed-loop and consensus derivatives are embarrassingly parallel over
// agents; this target measures the speedup at swarm sizes well beyond the
// default five-agent experiment and double-checks that both paths agree
// bit-for-bit.

#include <chrono>
#include <cstdio>
#include <vector>

#include <omp.h>

#include "rotsync/config.hpp"
#include "rotsync/consensus.hpp"
#include "rotsync/controller.hpp"
#include "rotsync/rng.hpp"

using namespace rotsync;

namespace {

double wtime() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

DirectedWeightedGraph ring_plus_random(int n, int extra_per_node, Rng& rng) {
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    edges.push_back(Edge{i, (i + 1) % n, rng.uniform_open(0.0, 1.0)});
  }
  for (int i = 0; i < n; ++i) {
    for (int e = 0; e < extra_per_node; ++e) {
      const int j = static_cast<int>(rng.uniform01() * n);
      if (j == i || j == (i + 1) % n || j >= n) {
        continue;
      }
      edges.push_back(Edge{i, j, rng.uniform_open(0.0, 1.0)});
    }
  }
  // Duplicate draws are possible; dedupe keeps construction happy.
  std::vector<Edge> unique;
  for (const Edge& e : edges) {
    bool seen = false;
    for (const Edge& u : unique) {
      if (u.from == e.from && u.to == e.to) {
        seen = true;
        break;
      }
    }
    if (!seen) {
      unique.push_back(e);
    }
  }
  return DirectedWeightedGraph(n, unique);
}

template <class F> double best_of(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const double t0 = wtime();
    f();
    best = std::min(best, wtime() - t0);
  }
  return best;
}

bool bitwise_equal(const SwarmDerivative& a, const SwarmDerivative& b) {
  for (std::size_t i = 0; i < a.dQ.size(); ++i) {
    if (a.dQ[i] != b.dQ[i] || a.dR[i] != b.dR[i]) {
      return false;
    }
  }
  return true;
}

} // namespace

int main() {
  const int d = 6;
  const int k = 3;
  const int reps = 5;
  std::printf("threads available: %d\n\n", omp_get_max_threads());
  std::printf("%8s %6s %14s %14s %9s %6s\n", "n", "d", "serial [ms]",
              "openmp [ms]", "speedup", "equal");

  for (int n : {64, 256, 1024, 4096}) {
    Rng rng(42);
    const DirectedWeightedGraph g = ring_plus_random(n, 4, rng);
    const SwarmState swarm = init_gaussian_qr(7, n, d, k);

    SwarmDerivative serial_out, omp_out;
    const double t_serial = best_of(reps, [&] {
      serial_out = closed_loop_derivative(swarm, g, EvalMode::Serial);
    });
    const double t_omp = best_of(reps, [&] {
      omp_out = closed_loop_derivative(swarm, g, EvalMode::OpenMP);
    });

    std::printf("%8d %6d %14.3f %14.3f %8.2fx %6s\n", n, d, t_serial * 1e3,
                t_omp * 1e3, t_serial / t_omp,
                bitwise_equal(serial_out, omp_out) ? "yes" : "NO");
  }

  std::printf("\nconsensus derivative kernel:\n");
  std::printf("%8s %6s %14s %14s %9s %6s\n", "n", "dxk", "serial [ms]",
              "openmp [ms]", "speedup", "equal");
  for (int n : {256, 1024, 4096, 16384}) {
    Rng rng(43);
    const DirectedWeightedGraph g = ring_plus_random(n, 4, rng);
    const ConsensusState z0 = init_gaussian_z(7, n, d, k);

    std::vector<Eigen::MatrixXd> serial_out, omp_out;
    const double t_serial = best_of(
        reps, [&] { serial_out = consensus_derivative(z0, g, EvalMode::Serial); });
    const double t_omp = best_of(
        reps, [&] { omp_out = consensus_derivative(z0, g, EvalMode::OpenMP); });

    bool equal = true;
    for (std::size_t i = 0; i < serial_out.size(); ++i) {
      if (serial_out[i] != omp_out[i]) {
        equal = false;
      }
    }
    std::printf("%8d %3dx%-2d %14.3f %14.3f %8.2fx %6s\n", n, d, k,
                t_serial * 1e3, t_omp * 1e3, t_serial / t_omp,
                equal ? "yes" : "NO");
  }
  return 0;
}
