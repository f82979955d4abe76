#include "edcr_spike/parallel.hpp"

#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace edcr_spike {

namespace {
#ifdef _OPENMP
const int kDefaultThreads = omp_get_max_threads();
#endif
}  // namespace

void set_thread_cap(int n) {
#ifdef _OPENMP
  omp_set_num_threads(n < 1 ? kDefaultThreads : n);
#else
  (void)n;
#endif
}

int thread_cap_from_env() {
  const char* raw = std::getenv("EDCR_SPIKE_THREADS");
  if (raw == nullptr) return 0;
  try {
    const int n = std::stoi(raw);
    return n > 0 ? n : 0;
  } catch (const std::exception&) {
    return 0;
  }
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace edcr_spike
