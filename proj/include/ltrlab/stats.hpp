#pragma once

// Significance tests shared by the interleaving and A/B reports.

#include <cstdint>

namespace ltrlab::stats {

/// Two-sided critical value z_{1 - alpha/2} of the standard normal.
double normal_critical_value(double alpha);

struct ZTest {
  double z = 0.0;
  bool significant = false;
};

/// Difference of two proportions measured on the same n sessions whose
/// outcomes are mutually exclusive (multinomial counts a and b):
/// z = (a - b) / sqrt(a + b - (a - b)^2 / n).
ZTest paired_proportion_test(std::int64_t a, std::int64_t b, std::int64_t n, double alpha);

/// Pooled two-proportion z-test for independent samples x1/n1 vs x2/n2.
ZTest two_proportion_test(std::int64_t x1, std::int64_t n1, std::int64_t x2, std::int64_t n2,
                          double alpha);

/// Smallest x with P(Binomial(n, p) <= x) >= q.
std::int64_t binomial_quantile(std::int64_t n, double p, double q);

/// (variant - control) / control, with 0/0 defined as 0.
double relative_change(double control, double variant);

}  // namespace ltrlab::stats
