#pragma once

#include <limits>

namespace bpop {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // 0.5 * log(2 pi)

/// log N(x | mean, sd^2). Requires sd > 0.
double normal_logpdf(double x, double mean, double sd) noexcept;

double normal_cdf(double z) noexcept;

/// log(Phi(b) - Phi(a)) for standardized bounds a < b, stable in both tails.
double log_normal_interval_mass(double a, double b) noexcept;

/// Bounds of a truncated normal. Either side may be infinite.
struct Truncation {
  double lower{0.0};
  double upper{kInf};

  bool contains(double x) const noexcept { return x >= lower && x <= upper; }
  bool operator==(const Truncation&) const = default;
};

/// Log density of N(mean, sd^2) truncated to [lower, upper], including the
/// normalizing constant. Returns -inf outside the support.
double truncated_normal_logpdf(double x, double mean, double sd, Truncation bounds) noexcept;

/// Quantile of N(mean, sd^2) truncated to bounds, for u in (0, 1).
double truncated_normal_quantile(double u, double mean, double sd, Truncation bounds);

/// Standard normal quantile.
double normal_quantile(double p);

}  // namespace bpop
