#include "bpop/target.hpp"

#include <cmath>

namespace bpop {

Transform ParamInfo::transform() const noexcept {
  if (std::isfinite(lower) && std::isfinite(upper)) return Transform::logit;
  if (std::isfinite(lower)) return Transform::lower_log;
  return Transform::identity;
}

double to_unconstrained(const ParamInfo& info, double x) noexcept {
  switch (info.transform()) {
    case Transform::lower_log:
      return std::log(x - info.lower);
    case Transform::logit: {
      const double p = (x - info.lower) / (info.upper - info.lower);
      return std::log(p) - std::log1p(-p);
    }
    case Transform::identity:
      break;
  }
  return x;
}

double from_unconstrained(const ParamInfo& info, double u) noexcept {
  switch (info.transform()) {
    case Transform::lower_log:
      return info.lower + std::exp(u);
    case Transform::logit:
      return info.lower + (info.upper - info.lower) / (1.0 + std::exp(-u));
    case Transform::identity:
      break;
  }
  return u;
}

double log_jacobian(const ParamInfo& info, double u) noexcept {
  switch (info.transform()) {
    case Transform::lower_log:
      return u;
    case Transform::logit: {
      // log sigmoid(u) + log(1 - sigmoid(u)), written to avoid overflow.
      const double a = std::abs(u);
      return std::log(info.upper - info.lower) - a - 2.0 * std::log1p(std::exp(-a));
    }
    case Transform::identity:
      break;
  }
  return 0.0;
}

DenseTarget::DenseTarget(std::vector<ParamInfo> params, std::vector<double> start, LogDensity log_density)
    : params_{std::move(params)}, x_{std::move(start)}, f_{std::move(log_density)} {}

double DenseTarget::current_local(std::size_t) { return f_(x_); }

double DenseTarget::proposed_local(std::size_t i, double v) {
  const double old = x_[i];
  x_[i] = v;
  const double out = f_(x_);
  x_[i] = old;
  return out;
}

}  // namespace bpop
