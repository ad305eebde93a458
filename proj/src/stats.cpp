#include "ltrlab/stats.hpp"

#include <cmath>
#include <limits>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/normal.hpp>

namespace ltrlab::stats {

double normal_critical_value(double alpha) {
  return boost::math::quantile(boost::math::normal_distribution<>(0.0, 1.0), 1.0 - alpha / 2.0);
}

ZTest paired_proportion_test(std::int64_t a, std::int64_t b, std::int64_t n, double alpha) {
  if (n <= 0) return {};
  const double diff = static_cast<double>(a - b);
  const double variance =
      static_cast<double>(a + b) - diff * diff / static_cast<double>(n);
  if (!(variance > 0.0)) return {};
  const double z = diff / std::sqrt(variance);
  return {z, std::abs(z) > normal_critical_value(alpha)};
}

ZTest two_proportion_test(std::int64_t x1, std::int64_t n1, std::int64_t x2, std::int64_t n2,
                          double alpha) {
  if (n1 <= 0 || n2 <= 0) return {};
  const double p1 = static_cast<double>(x1) / static_cast<double>(n1);
  const double p2 = static_cast<double>(x2) / static_cast<double>(n2);
  const double pooled = static_cast<double>(x1 + x2) / static_cast<double>(n1 + n2);
  const double variance =
      pooled * (1.0 - pooled) * (1.0 / static_cast<double>(n1) + 1.0 / static_cast<double>(n2));
  if (!(variance > 0.0)) return {};
  const double z = (p2 - p1) / std::sqrt(variance);
  return {z, std::abs(z) > normal_critical_value(alpha)};
}

std::int64_t binomial_quantile(std::int64_t n, double p, double q) {
  const boost::math::binomial_distribution<> dist(static_cast<double>(n), p);
  for (std::int64_t x = 0; x <= n; ++x) {
    if (boost::math::cdf(dist, static_cast<double>(x)) >= q) return x;
  }
  return n;
}

double relative_change(double control, double variant) {
  if (control == 0.0) {
    return variant == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return (variant - control) / control;
}

}  // namespace ltrlab::stats
