#include "resop/stats.hpp"

#include <cmath>
#include <limits>

#include "resop/error.hpp"

namespace resop::stats {

namespace {

double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 1e-14;
  constexpr double kTiny = 1e-300;

  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw ContractError("incomplete_beta: a and b must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double nu) {
  if (!(nu > 0.0)) throw ContractError("student_t_cdf: nu must be positive");
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double x = nu / (nu + t * t);
  const double half_tail = 0.5 * incomplete_beta(0.5 * nu, 0.5, x);
  return t >= 0.0 ? 1.0 - half_tail : half_tail;
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b, double alpha) {
  if (a.size() != b.size()) throw ContractError("paired_t_test: sample lengths differ");
  const size_t n = a.size();
  if (n < 2) throw ContractError("paired_t_test: need at least 2 pairs");

  double mean = 0.0;
  for (size_t i = 0; i < n; ++i) mean += a[i] - b[i];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double d = (a[i] - b[i]) - mean;
    ss += d * d;
  }
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));

  TTestResult result;
  if (sd == 0.0) {
    // All differences identical: the statistic diverges; take the limit.
    if (mean > 0.0) {
      result.t = std::numeric_limits<double>::infinity();
      result.p = 0.0;
    } else {
      result.t = mean < 0.0 ? -std::numeric_limits<double>::infinity() : 0.0;
      result.p = 1.0;
    }
  } else {
    result.t = mean / (sd / std::sqrt(static_cast<double>(n)));
    result.p = 1.0 - student_t_cdf(result.t, static_cast<double>(n - 1));
  }
  result.significant = result.p < alpha;
  return result;
}

}  // namespace resop::stats
