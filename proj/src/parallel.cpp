#include "sadiv/parallel.hpp"

#include <atomic>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sadiv::parallel {

namespace {
std::atomic<int> g_max_threads{0};
}

void set_max_threads(int n) { g_max_threads.store(n < 0 ? 0 : n); }

int max_threads() { return g_max_threads.load(); }

int effective_threads() {
  const int cap = g_max_threads.load();
#ifdef _OPENMP
  const int hw = omp_get_max_threads();
  if (cap == 0) return hw;
  return cap < hw ? cap : hw;
#else
  (void)cap;
  return 1;
#endif
}

ScopedSerial::ScopedSerial() : saved_(g_max_threads.load()) {
  g_max_threads.store(1);
}

ScopedSerial::~ScopedSerial() { g_max_threads.store(saved_); }

}  // namespace sadiv::parallel
