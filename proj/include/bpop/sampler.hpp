#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "bpop/target.hpp"

namespace bpop {

struct SamplerConfig {
  std::size_t n_chains{8};
  std::size_t n_iter{80'000};
  std::size_t n_warmup{20'000};
  std::size_t thin{10};
  double target_accept{0.44};
  std::uint64_t seed{0};
  std::size_t adapt_window{50};

  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
  std::size_t kept_per_chain() const noexcept { return (n_iter - n_warmup) / thin; }
};

struct UpdateResult {
  bool accepted{false};
  bool nan{false};
};

/// One random-walk Metropolis step for parameter i on its unconstrained scale.
UpdateResult metropolis_update(Target& target, std::size_t i, double step_scale, std::mt19937_64& rng);

/// Metropolis step for block move m of the target.
UpdateResult block_move_update(Target& target, std::size_t m, double step_scale, std::mt19937_64& rng);

/// Multiplies each scale by exp(+-kappa) toward the target rate, kappa = min(1, 1/sqrt(batch)).
/// batch is 1-based.
std::vector<double> adapt_scales(std::span<const double> accept_rates, std::vector<double> scales,
                                 double target_accept, std::size_t batch);

struct ChainResult {
  std::size_t chain_id{0};
  std::uint64_t seed{0};
  std::size_t n_kept{0};
  std::vector<double> draws;  // n_kept x dim, draw-major
  std::vector<double> accept_rate;  // post-warmup, per parameter
  std::vector<double> scale_at_warmup_end;  // sites, then block moves
  std::vector<double> scale_final;
  std::size_t nan_rejections{0};
};

/// Seed of the generator for chain_id, derived from the run seed.
std::uint64_t chain_seed(std::uint64_t seed, std::size_t chain_id);

ChainResult run_chain(Target& target, const SamplerConfig& config, std::size_t chain_id, std::mt19937_64& rng);

struct PosteriorDraws {
  std::vector<std::string> names;
  std::size_t n_chains{0};
  std::size_t n_draws{0};  // kept draws per chain
  std::vector<double> values;  // [param][chain][draw]
  std::vector<std::uint64_t> chain_seeds;
  std::string config_hash;
  std::vector<std::vector<double>> accept_rates;  // [chain][param]
  std::vector<std::vector<double>> step_scales;  // [chain][param], frozen after warmup
  std::vector<std::size_t> nan_rejections;  // per chain

  std::size_t num_params() const noexcept { return names.size(); }
  std::span<const double> param(std::size_t i) const {
    return std::span<const double>(values).subspan(i * n_chains * n_draws, n_chains * n_draws);
  }
  std::span<const double> chain(std::size_t i, std::size_t ch) const {
    return param(i).subspan(ch * n_draws, n_draws);
  }
  /// Index of name; throws std::out_of_range if absent.
  std::size_t index_of(const std::string& name) const;

  bool operator==(const PosteriorDraws&) const = default;
};

/// Runs chains in parallel (at most BPOP_THREADS at once, default hardware concurrency)
/// and merges them in chain-id order. Failures are collected and rethrown listing chain ids.
PosteriorDraws run_chains(const TargetFactory& factory, const SamplerConfig& config);

}  // namespace bpop
