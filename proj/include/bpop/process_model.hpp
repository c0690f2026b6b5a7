#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "bpop/config.hpp"
#include "bpop/error_model.hpp"
#include "bpop/grid.hpp"
#include "bpop/ingest.hpp"

namespace bpop {

/// One full assignment of the model unknowns. Log-scale quantities are log persons.
struct LatentState {
  Grid3<double> eta_ctr;  // [c, t, r]
  Grid2<double> eta_cr;
  std::vector<double> eta_c;
  double eta_global{0.0};
  double sigma_eta{0.02};
  double sigma_ref{0.02};
  double phi{1.0};
  double omega{1.0};
  ErrorState error;

  bool operator==(const LatentState&) const = default;
};

/// Zero-filled state with the dimensions implied by data.
LatentState make_state(const PopulationDataset& data);

/// RW2 prior for one series. t_ref is the 0-based index of the decennial year;
/// both t_ref and t_ref - 1 are anchored at eta_cr with sd sigma_ref, later years
/// recurse forward and earlier years backward with sd sigma_eta.
double rw2_logprior(std::span<const double> eta, double eta_cr, double sigma_ref, double sigma_eta,
                    std::size_t t_ref);

double hierarchy_logprior(const Grid2<double>& eta_cr, std::span<const double> eta_c, double eta_global,
                          double phi, double omega, const PriorConstants& priors);

/// Half-normal priors on sigma_ref, sigma_eta, phi and omega.
double hyperprior_logdensity(const LatentState& state, const PriorConstants& priors);

/// Sum of rw2_logprior over every (c, r) series.
double process_logprior(const LatentState& state, std::size_t t_ref);

/// Starting point for a chain: log PEP counts where present, linear extrapolation on the
/// log scale elsewhere, hierarchy levels at the means of the initial eta, jitter from rng.
LatentState init_state(const PopulationDataset& data, std::mt19937_64& rng, const ModelConfig& config);

}  // namespace bpop
