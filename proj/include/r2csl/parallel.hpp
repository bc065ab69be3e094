#pragma once

#include <chrono>
#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace r2csl {

enum class Execution { Serial, Parallel };

// Data-parallel loop over [0, n). Bodies must write only to their own index's
// slot; results are then identical for both execution modes and any schedule.
template <typename Fn>
void parallel_for(std::int64_t n, Execution exec, Fn&& fn) {
  if (exec == Execution::Parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t i = 0; i < n; ++i) fn(i);
  } else {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
  }
}

inline double wall_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

}  // namespace r2csl
