#include "bpop/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace bpop {

void SamplerConfig::validate() const {
  if (n_chains < 1) throw std::invalid_argument("sampler: need at least one chain");
  if (thin < 1) throw std::invalid_argument("sampler: thin must be at least 1");
  if (n_warmup >= n_iter) throw std::invalid_argument("sampler: warmup must be shorter than the run");
  if (adapt_window < 1) throw std::invalid_argument("sampler: adaptation window must be positive");
  if (!(target_accept > 0.0 && target_accept < 1.0)) throw std::invalid_argument("sampler: target_accept in (0,1)");
}

UpdateResult metropolis_update(Target& target, std::size_t i, double step_scale, std::mt19937_64& rng) {
  const ParamInfo& info = target.info(i);
  const double x = target.value(i);
  const double step = step_scale * std::normal_distribution<double>{}(rng);
  const double log_u = std::log(std::uniform_real_distribution<double>{}(rng));
  if (step == 0.0) {
    target.accept(i, x);
    return {true, false};
  }
  const double u = to_unconstrained(info, x);
  const double u_new = u + step;
  const double x_new = from_unconstrained(info, u_new);
  const double proposed = target.proposed_local(i, x_new);
  const double current = target.current_local(i);
  const double log_ratio = proposed + log_jacobian(info, u_new) - current - log_jacobian(info, u);
  if (std::isnan(log_ratio)) return {false, true};
  if (x_new == x || log_u < log_ratio) {
    target.accept(i, x_new);
    return {true, false};
  }
  return {false, false};
}

UpdateResult block_move_update(Target& target, std::size_t m, double step_scale, std::mt19937_64& rng) {
  const double step = step_scale * std::normal_distribution<double>{}(rng);
  const double log_u = std::log(std::uniform_real_distribution<double>{}(rng));
  if (step == 0.0) return {true, false};
  const double proposed = target.move_proposed_local(m, step);
  const double current = target.move_current_local(m);
  const double log_ratio = proposed - current;
  if (std::isnan(log_ratio)) return {false, true};
  if (log_u < log_ratio) {
    target.move_accept(m, step);
    return {true, false};
  }
  return {false, false};
}

std::vector<double> adapt_scales(std::span<const double> accept_rates, std::vector<double> scales,
                                 double target_accept, std::size_t batch) {
  const double kappa = std::min(1.0, 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(batch, 1))));
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (accept_rates[i] > target_accept) {
      scales[i] *= std::exp(kappa);
    } else if (accept_rates[i] < target_accept) {
      scales[i] *= std::exp(-kappa);
    }
  }
  return scales;
}

std::uint64_t chain_seed(std::uint64_t seed, std::size_t chain_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(chain_id)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

ChainResult run_chain(Target& target, const SamplerConfig& config, std::size_t chain_id, std::mt19937_64& rng) {
  config.validate();
  const std::size_t dim = target.dim();
  ChainResult out;
  out.chain_id = chain_id;
  out.n_kept = config.kept_per_chain();
  out.draws.reserve(out.n_kept * dim);

  // Scales for the single sites followed by the block moves.
  const std::size_t n_moves = target.num_moves();
  std::vector<double> scales(dim + n_moves);
  for (std::size_t i = 0; i < dim; ++i) scales[i] = target.info(i).initial_scale;
  for (std::size_t m = 0; m < n_moves; ++m) scales[dim + m] = target.move_initial_scale(m);
  std::vector<double> batch_accepts(scales.size(), 0.0);
  std::vector<double> kept_accepts(scales.size(), 0.0);
  std::vector<double> rates(scales.size());
  std::size_t batch = 0;
  std::size_t in_batch = 0;
  out.scale_at_warmup_end = scales;

  for (std::size_t iter = 0; iter < config.n_iter; ++iter) {
    const bool warmup = iter < config.n_warmup;
    for (std::size_t i = 0; i < dim; ++i) {
      const auto result = metropolis_update(target, i, scales[i], rng);
      if (result.nan) ++out.nan_rejections;
      if (warmup) {
        batch_accepts[i] += result.accepted ? 1.0 : 0.0;
      } else {
        kept_accepts[i] += result.accepted ? 1.0 : 0.0;
      }
    }
    for (std::size_t m = 0; m < n_moves; ++m) {
      const auto result = block_move_update(target, m, scales[dim + m], rng);
      if (result.nan) ++out.nan_rejections;
      (warmup ? batch_accepts : kept_accepts)[dim + m] += result.accepted ? 1.0 : 0.0;
    }
    if (warmup) {
      if (++in_batch == config.adapt_window) {
        for (std::size_t i = 0; i < scales.size(); ++i) rates[i] = batch_accepts[i] / static_cast<double>(in_batch);
        scales = adapt_scales(rates, std::move(scales), config.target_accept, ++batch);
        std::fill(batch_accepts.begin(), batch_accepts.end(), 0.0);
        in_batch = 0;
      }
      if (iter + 1 == config.n_warmup) out.scale_at_warmup_end = scales;
      continue;
    }
    const std::size_t post = iter - config.n_warmup;
    if ((post + 1) % config.thin == 0 && out.draws.size() < out.n_kept * dim) {
      for (std::size_t i = 0; i < dim; ++i) out.draws.push_back(target.value(i));
    }
  }
  if (config.n_warmup == 0) out.scale_at_warmup_end = scales;
  out.scale_final = scales;
  out.accept_rate.resize(dim);
  const double n_post = static_cast<double>(config.n_iter - config.n_warmup);
  for (std::size_t i = 0; i < dim; ++i) out.accept_rate[i] = kept_accepts[i] / n_post;
  return out;
}

std::size_t PosteriorDraws::index_of(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw std::out_of_range("no parameter named " + name);
  return static_cast<std::size_t>(it - names.begin());
}

namespace {

std::size_t thread_cap(std::size_t n_chains) {
  std::size_t cap = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("BPOP_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) cap = static_cast<std::size_t>(v);
  }
  return std::min(cap, n_chains);
}

}  // namespace

PosteriorDraws run_chains(const TargetFactory& factory, const SamplerConfig& config) {
  config.validate();
  const std::size_t n = config.n_chains;
  std::vector<ChainResult> results(n);
  std::vector<std::string> errors(n);
  std::vector<std::string> names;
  std::mutex names_mutex;
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t ch = next++; ch < n; ch = next++) {
      try {
        const auto seed = chain_seed(config.seed, ch);
        std::mt19937_64 rng(seed);
        auto target = factory(rng);
        results[ch] = run_chain(*target, config, ch, rng);
        results[ch].seed = seed;
        if (ch == 0) {
          std::lock_guard lock(names_mutex);
          for (std::size_t i = 0; i < target->dim(); ++i) names.push_back(target->info(i).name);
        }
      } catch (const std::exception& e) {
        errors[ch] = e.what();
      }
    }
  };
  const std::size_t n_threads = thread_cap(n);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t k = 0; k < n_threads; ++k) pool.emplace_back(worker);
  }

  std::string failure;
  for (std::size_t ch = 0; ch < n; ++ch) {
    if (!errors[ch].empty()) failure += "chain " + std::to_string(ch) + ": " + errors[ch] + "; ";
  }
  if (!failure.empty()) throw std::runtime_error("sampling failed (" + failure.substr(0, failure.size() - 2) + ")");

  PosteriorDraws draws;
  draws.names = std::move(names);
  draws.n_chains = n;
  draws.n_draws = config.kept_per_chain();
  const std::size_t dim = draws.names.size();
  draws.values.resize(dim * n * draws.n_draws);
  for (std::size_t ch = 0; ch < n; ++ch) {
    const auto& res = results[ch];
    if (res.draws.size() != dim * draws.n_draws) throw std::logic_error("chain dimension mismatch");
    for (std::size_t k = 0; k < draws.n_draws; ++k) {
      for (std::size_t i = 0; i < dim; ++i) {
        draws.values[(i * n + ch) * draws.n_draws + k] = res.draws[k * dim + i];
      }
    }
    draws.chain_seeds.push_back(res.seed);
    draws.accept_rates.push_back(res.accept_rate);
    draws.step_scales.emplace_back(res.scale_final.begin(), res.scale_final.begin() + static_cast<std::ptrdiff_t>(dim));
    draws.nan_rejections.push_back(res.nan_rejections);
  }
  return draws;
}

}  // namespace bpop
