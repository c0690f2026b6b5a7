#include "bpop/distributions.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bpop {

double normal_logpdf(double x, double mean, double sd) noexcept {
  const double z = (x - mean) / sd;
  return -kLogSqrt2Pi - std::log(sd) - 0.5 * z * z;
}

double normal_cdf(double z) noexcept { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double log_normal_interval_mass(double a, double b) noexcept {
  if (!(a < b)) return kNegInf;
  // Work in whichever tail keeps the subtraction well conditioned.
  if (a >= 0.0) {
    const double qa = 0.5 * std::erfc(a / std::numbers::sqrt2);
    const double qb = std::isinf(b) ? 0.0 : 0.5 * std::erfc(b / std::numbers::sqrt2);
    return std::log(qa - qb);
  }
  if (b <= 0.0) {
    const double pb = 0.5 * std::erfc(-b / std::numbers::sqrt2);
    const double pa = std::isinf(a) ? 0.0 : 0.5 * std::erfc(-a / std::numbers::sqrt2);
    return std::log(pb - pa);
  }
  const double lower_tail = std::isinf(a) ? 0.0 : 0.5 * std::erfc(-a / std::numbers::sqrt2);
  const double upper_tail = std::isinf(b) ? 0.0 : 0.5 * std::erfc(b / std::numbers::sqrt2);
  return std::log1p(-(lower_tail + upper_tail));
}

double truncated_normal_logpdf(double x, double mean, double sd, Truncation bounds) noexcept {
  if (std::isnan(x) || !bounds.contains(x) || !(sd > 0.0)) return kNegInf;
  const double log_mass =
      log_normal_interval_mass((bounds.lower - mean) / sd, (bounds.upper - mean) / sd);
  return normal_logpdf(x, mean, sd) - log_mass;
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>{}, p);
}

double truncated_normal_quantile(double u, double mean, double sd, Truncation bounds) {
  if (!(u > 0.0 && u < 1.0)) throw std::domain_error("truncated_normal_quantile: u must lie in (0, 1)");
  const double pa = std::isinf(bounds.lower) ? 0.0 : normal_cdf((bounds.lower - mean) / sd);
  const double pb = std::isinf(bounds.upper) ? 1.0 : normal_cdf((bounds.upper - mean) / sd);
  const double p = pa + u * (pb - pa);
  const double x = mean + sd * normal_quantile(std::clamp(p, 1e-300, 1.0 - 1e-16));
  return std::clamp(x, bounds.lower, bounds.upper);
}

}  // namespace bpop
