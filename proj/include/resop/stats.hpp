#pragma once

#include <span>

namespace resop::stats {

// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction;
// absolute accuracy ~1e-10 over the arguments used here.
double incomplete_beta(double a, double b, double x);

// P(T <= t) for Student's t with nu degrees of freedom.
double student_t_cdf(double t, double nu);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;  // one-sided, H1: mean(a) > mean(b)
  bool significant = false;
};

// One-sided paired Student t-test. Degenerate-variance convention: when every
// difference is identical, p is the limit value (0 for a positive mean
// difference, else 1).
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b, double alpha);

}  // namespace resop::stats
