#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bpop/distributions.hpp"

namespace bpop {

/// Prior constants. All truncated-normal hyperpriors act on standard
/// deviations (not variances); the "scale" fields are prior sds.
struct PriorConstants {
  double eta_global_mean{0.0};
  double eta_global_sd{10.0};
  /// sigma_ref, sigma_eta, phi, omega ~ N+(0, scale^2)
  double process_sd_scale{10.0};
  /// sigma_ns and delta hierarchies: each level ~ N+(parent, scale^2)
  double error_sd_scale{10.0};
  double chi_mean{0.91};
  double chi_sd{1.04};
  Truncation chi_bounds{0.0, kInf};
  Truncation delta_ctr_bounds{0.0, kInf};

  bool operator==(const PriorConstants&) const = default;
};

struct ModelConfig {
  int start_year{2005};
  int end_year{2021};
  int tref_year{2010};
  /// Modeled race labels. Empty selects every race present in the census table.
  std::vector<std::string> races;
  PriorConstants priors;
  /// When set, the ACS period ending in this year carries non-sampling error only.
  std::optional<int> acs_reference_end_year;
  /// Added to the ACS covariance diagonal. Zero disables it.
  double acs_jitter{0.0};
  /// Per-chain jitter (log scale) applied to initial eta values.
  double init_jitter{0.005};
  std::vector<int> holdout_years;

  bool operator==(const ModelConfig&) const = default;
};

/// Preset that reproduces the executable reference variant: delta_ctr in [1, 1000]
/// and chi_c in [0, 1].
ModelConfig reference_code_variant(ModelConfig base);

/// Stable textual form used for hashing and manifests.
std::string canonical_string(const ModelConfig& config);

}  // namespace bpop
