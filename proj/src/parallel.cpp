#include "resop/parallel.hpp"

#include <atomic>

namespace resop::parallel {

namespace {
std::atomic<bool> g_enabled{true};
}

bool enabled() { return g_enabled.load(std::memory_order_relaxed); }

void set_enabled(bool value) { g_enabled.store(value, std::memory_order_relaxed); }

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace resop::parallel
