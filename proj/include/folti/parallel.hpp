#pragma once

// Seeded random streams and index-parallel loops. Every parallel loop in the
// toolkit writes results by index, so output does not depend on the worker count.

#include <cstdint>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace folti {

using Rng = std::mt19937_64;

/// Independent stream for (seed, index): the same pair always yields the same sequence.
inline Rng make_stream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

/// Default worker count: the OpenMP maximum, or 1 without OpenMP.
inline int default_workers() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

/// Runs fn(i) for i in [0, count) on `workers` threads (<= 1 means serial).
template <class Fn>
void parallel_for(int count, int workers, Fn&& fn) {
  if (workers <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
#pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (int i = 0; i < count; ++i) fn(i);
}

}  // namespace folti
