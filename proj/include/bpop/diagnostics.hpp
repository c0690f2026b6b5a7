#pragma once

#include <functional>
#include <span>
#include <vector>

namespace bpop {

/// Split-chain potential scale reduction. Requires >= 2 chains of >= 4 draws.
/// Returns exactly 1.0 when every chain is constant at the same value.
double rhat(const std::vector<std::span<const double>>& chains);

/// Multi-chain effective sample size from autocorrelations, truncated with Geyer's
/// initial positive (and monotone) sequence. Requires >= 8 draws in total.
double ess(const std::vector<std::span<const double>>& chains);

/// Sup-distance between the empirical CDF of sample and cdf.
double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf);

}  // namespace bpop
