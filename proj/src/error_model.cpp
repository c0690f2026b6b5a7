#include "bpop/error_model.hpp"

#include <stdexcept>

#include "bpop/distributions.hpp"

namespace bpop {

double acs_total_variance(double sigma_ns, double s, bool is_reference_period) {
  if (!(sigma_ns >= 0.0) || !(s >= 0.0)) throw std::invalid_argument("acs_total_variance: negative sd");
  return is_reference_period ? sigma_ns * sigma_ns : sigma_ns * sigma_ns + s * s;
}

double pep_total_variance(double sigma_ns, std::span<const double> deltas) {
  if (!(sigma_ns >= 0.0)) throw std::invalid_argument("pep_total_variance: negative sd");
  double total = sigma_ns * sigma_ns;
  for (double delta : deltas) {
    if (!(delta >= 0.0)) throw std::invalid_argument("pep_total_variance: negative delta");
    total += delta * delta;
  }
  return total;
}

double error_hyperprior_logdensity(const ErrorState& state, const PriorConstants& priors) {
  const double scale = priors.error_sd_scale;
  const Truncation half{0.0, kInf};
  const std::size_t C = state.sigma_ns_c.size();
  const std::size_t R = state.sigma_ns_cr.cols();
  const std::size_t K = state.delta_ctr.dim1();

  double total = 0.0;
  for (std::size_t c = 0; c < C; ++c) {
    total += truncated_normal_logpdf(state.sigma_ns_c[c], 0.0, scale, half);
    total += truncated_normal_logpdf(state.delta_c[c], 0.0, scale, half);
    total += truncated_normal_logpdf(state.chi_c[c], priors.chi_mean, priors.chi_sd, priors.chi_bounds);
    for (std::size_t r = 0; r < R; ++r) {
      total += truncated_normal_logpdf(state.sigma_ns_cr(c, r), state.sigma_ns_c[c], scale, half);
      total += truncated_normal_logpdf(state.delta_cr(c, r), state.delta_c[c], scale, half);
      for (std::size_t k = 0; k < K; ++k) {
        total += truncated_normal_logpdf(state.delta_ctr(c, k, r), state.delta_cr(c, r), scale,
                                         priors.delta_ctr_bounds);
      }
    }
  }
  if (!(state.rho >= 0.0 && state.rho <= 1.0)) return kNegInf;
  return total;
}

}  // namespace bpop
