#pragma once

#include <cassert>
#include <vector>

namespace resop {

// Dense row-major [n0][n1] array. Flat storage keeps the hot loops over
// (reservoir, period) cells contiguous.
template <typename T>
class Grid2 {
 public:
  Grid2() = default;
  Grid2(int n0, int n1, T init = T{}) : n0_(n0), n1_(n1), data_(static_cast<size_t>(n0) * n1, init) {}

  T& operator()(int a, int b) {
    assert(a >= 0 && a < n0_ && b >= 0 && b < n1_);
    return data_[static_cast<size_t>(a) * n1_ + b];
  }
  const T& operator()(int a, int b) const {
    assert(a >= 0 && a < n0_ && b >= 0 && b < n1_);
    return data_[static_cast<size_t>(a) * n1_ + b];
  }

  int extent0() const { return n0_; }
  int extent1() const { return n1_; }
  std::vector<T>& raw() { return data_; }
  const std::vector<T>& raw() const { return data_; }

  bool operator==(const Grid2&) const = default;

 private:
  int n0_ = 0, n1_ = 0;
  std::vector<T> data_;
};

// Dense row-major [n0][n1][n2] array.
template <typename T>
class Grid3 {
 public:
  Grid3() = default;
  Grid3(int n0, int n1, int n2, T init = T{})
      : n0_(n0), n1_(n1), n2_(n2), data_(static_cast<size_t>(n0) * n1 * n2, init) {}

  T& operator()(int a, int b, int c) {
    assert(a >= 0 && a < n0_ && b >= 0 && b < n1_ && c >= 0 && c < n2_);
    return data_[(static_cast<size_t>(a) * n1_ + b) * n2_ + c];
  }
  const T& operator()(int a, int b, int c) const {
    assert(a >= 0 && a < n0_ && b >= 0 && b < n1_ && c >= 0 && c < n2_);
    return data_[(static_cast<size_t>(a) * n1_ + b) * n2_ + c];
  }

  int extent0() const { return n0_; }
  int extent1() const { return n1_; }
  int extent2() const { return n2_; }
  std::vector<T>& raw() { return data_; }
  const std::vector<T>& raw() const { return data_; }

  bool operator==(const Grid3&) const = default;

 private:
  int n0_ = 0, n1_ = 0, n2_ = 0;
  std::vector<T> data_;
};

}  // namespace resop
