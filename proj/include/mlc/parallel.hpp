#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mlc {

enum class ExecMode { Serial, OpenMP };

/// Process-wide execution switch. Defaults to OpenMP when compiled in.
ExecMode& exec_mode();

/// Runs fn(i) for i in [0, n). Iterations must be independent and write only
/// to slots keyed by i, so serial and parallel execution give identical
/// results.
template <typename F>
void parallel_for(std::size_t n, F&& fn) {
#ifdef _OPENMP
  if (exec_mode() == ExecMode::OpenMP && !omp_in_parallel() && n > 1) {
#pragma omp parallel for schedule(dynamic, 1)
    for (long long i = 0; i < static_cast<long long>(n); ++i)
      fn(static_cast<std::size_t>(i));
    return;
  }
#endif
  for (std::size_t i = 0; i < n; ++i) fn(i);
}

}  // namespace mlc
