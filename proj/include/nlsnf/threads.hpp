#pragma once

#include <omp.h>

#include <cstdlib>

namespace nlsnf {

// Worker cap: NLSNF_THREADS wins over the OpenMP default. Results of the
// chunk-merged kernels are reproducible for a fixed thread count.
inline int effective_threads() {
  if (const char* env = std::getenv("NLSNF_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  return omp_get_max_threads();
}

}  // namespace nlsnf
