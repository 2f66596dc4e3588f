#pragma once

namespace rotsync {

/// Evaluation strategy for the per-agent derivative kernels. Both paths
/// produce bit-identical results: agents write to disjoint output slots and
/// every per-agent sum has a fixed accumulation order, so OpenMP scheduling
/// cannot change the numbers.
enum class EvalMode {
  Serial, ///< plain loop, reference implementation
  OpenMP, ///< `#pragma omp parallel for` over agents
};

/// Number of workers to use when a worker count of 0 ("auto") is requested.
int hardware_worker_count();

} // namespace rotsync
