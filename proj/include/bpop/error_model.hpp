#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bpop/config.hpp"
#include "bpop/grid.hpp"

namespace bpop {

/// Variance parameters shared by the data models. All sd fields are in persons.
struct ErrorState {
  Grid2<double> sigma_ns_cr;  // [c, r]
  std::vector<double> sigma_ns_c;
  /// [c, k, r]; k = 0 is the year index delta_first (the year after the decennial year).
  Grid3<double> delta_ctr;
  std::size_t delta_first{0};
  Grid2<double> delta_cr;
  std::vector<double> delta_c;
  std::vector<double> chi_c;  // percent net undercount
  double rho{0.5};

  bool operator==(const ErrorState&) const = default;
};

double acs_total_variance(double sigma_ns, double s, bool is_reference_period);

/// sigma_ns^2 plus the sum of squared deltas accumulated since the decennial year.
double pep_total_variance(double sigma_ns, std::span<const double> deltas);

/// Truncated-normal hyperpriors of the sigma_ns and delta hierarchies, chi and rho.
/// Returns -inf when any parameter leaves its support.
double error_hyperprior_logdensity(const ErrorState& state, const PriorConstants& priors);

}  // namespace bpop
