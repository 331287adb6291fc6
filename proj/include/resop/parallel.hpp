#pragma once

#ifdef _OPENMP
#include <omp.h>
#endif

namespace resop::parallel {

// Process-wide switch between the OpenMP kernels and their serial reference.
// Every parallel loop in this project writes results by index (or accumulates
// into a fixed number of group buffers merged in order), so both paths produce
// bitwise-identical output; tests assert that and the benchmark compares them.
bool enabled();
void set_enabled(bool value);
int max_threads();

// Runs fn(i) for i in [0, n). Iterations must be independent.
template <class F>
void for_each_index(int n, F&& fn) {
  if (enabled() && n > 1) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) fn(i);
  } else {
    for (int i = 0; i < n; ++i) fn(i);
  }
}

// RAII guard used by tests to force the serial reference path.
class SerialSection {
 public:
  SerialSection() : saved_(enabled()) { set_enabled(false); }
  ~SerialSection() { set_enabled(saved_); }
  SerialSection(const SerialSection&) = delete;
  SerialSection& operator=(const SerialSection&) = delete;

 private:
  bool saved_;
};

}  // namespace resop::parallel
