#include <cmath>
#include <cstdlib>
#include <random>

#include "bpop/diagnostics.hpp"
#include "bpop/sampler.hpp"
#include "doctest.h"

using namespace bpop;

namespace {

// Normal prior N(m0, s0^2) on eta with one observation y ~ N(eta, s^2).
constexpr double kM0 = 2.0;
constexpr double kS0 = 1.5;
constexpr double kY = 3.1;
constexpr double kS = 0.7;

std::unique_ptr<Target> conjugate_target(std::mt19937_64& rng) {
  auto f = [](const std::vector<double>& x) {
    const double a = (x[0] - kM0) / kS0;
    const double b = (kY - x[0]) / kS;
    return -0.5 * (a * a + b * b);
  };
  std::normal_distribution<double> z(0.0, 1.0);
  return std::make_unique<DenseTarget>(std::vector<ParamInfo>{{"eta", -kInf, kInf, 1.0}},
                                       std::vector<double>{kM0 + z(rng)}, f);
}

// a ~ Gamma(3, 1), b | a ~ N(a, 1).
double gamma_normal(const std::vector<double>& x) {
  if (x[0] <= 0.0) return -INFINITY;
  return 2.0 * std::log(x[0]) - x[0] - 0.5 * (x[1] - x[0]) * (x[1] - x[0]);
}

SamplerConfig small_config(std::size_t chains, std::size_t iter, std::size_t warmup, std::uint64_t seed) {
  SamplerConfig c;
  c.n_chains = chains;
  c.n_iter = iter;
  c.n_warmup = warmup;
  c.thin = 1;
  c.seed = seed;
  return c;
}

double gamma3_cdf(double x) { return x <= 0 ? 0.0 : 1.0 - std::exp(-x) * (1.0 + x + 0.5 * x * x); }

}  // namespace

TEST_CASE("sampler config defaults and validation") {
  SamplerConfig c;
  CHECK(c.n_chains == 8);
  CHECK(c.n_iter == 80000);
  CHECK(c.n_warmup == 20000);
  CHECK(c.thin == 10);
  CHECK(c.target_accept == 0.44);
  CHECK(c.adapt_window == 50);
  CHECK(c.kept_per_chain() == 6000);
  c.n_warmup = c.n_iter;
  CHECK_THROWS(c.validate());
  c = SamplerConfig{};
  c.thin = 0;
  CHECK_THROWS(c.validate());
  c = SamplerConfig{};
  c.n_chains = 0;
  CHECK_THROWS(c.validate());
}

TEST_CASE("a zero step is always accepted") {
  std::mt19937_64 rng(1);
  auto target = conjugate_target(rng);
  const double x = target->value(0);
  for (int i = 0; i < 20; ++i) {
    const auto r = metropolis_update(*target, 0, 0.0, rng);
    CHECK(r.accepted);
    CHECK(target->value(0) == x);
  }
}

TEST_CASE("fixed seed and state give the same accept decision") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    std::mt19937_64 init_a(7);
    std::mt19937_64 init_b(7);
    auto a = conjugate_target(init_a);
    auto b = conjugate_target(init_b);
    std::mt19937_64 ra(seed);
    std::mt19937_64 rb(seed);
    const auto x = metropolis_update(*a, 0, 2.0, ra);
    const auto y = metropolis_update(*b, 0, 2.0, rb);
    CHECK(x.accepted == y.accepted);
    CHECK(a->value(0) == b->value(0));
  }
}

TEST_CASE("NaN proposals are rejected and counted") {
  auto f = [](const std::vector<double>& x) { return x[0] > 1.0 ? NAN : -0.5 * x[0] * x[0]; };
  DenseTarget target({{"x", -kInf, kInf, 2.0}}, {0.0}, f);
  std::mt19937_64 rng(3);
  auto config = small_config(1, 2000, 1000, 3);
  const auto result = run_chain(target, config, 0, rng);
  CHECK(result.nan_rejections > 0);
  for (double v : result.draws) {
    CHECK(std::isfinite(v));
    CHECK(v <= 1.0);
  }
}

TEST_CASE("adapt_scales rule") {
  std::vector<double> rates{0.44, 1.0, 0.0};
  const auto out = adapt_scales(rates, {1.0, 1.0, 1.0}, 0.44, 4);
  CHECK(out[0] == 1.0);
  CHECK(out[1] == doctest::Approx(std::exp(0.5)));
  CHECK(out[2] == doctest::Approx(std::exp(-0.5)));
  const auto first = adapt_scales(rates, {1.0, 1.0, 1.0}, 0.44, 1);
  CHECK(first[1] == doctest::Approx(std::exp(1.0)));
}

TEST_CASE("chain seeds differ across chains and runs") {
  CHECK(chain_seed(1, 0) != chain_seed(1, 1));
  CHECK(chain_seed(1, 0) != chain_seed(2, 0));
  CHECK(chain_seed(1, 0) == chain_seed(1, 0));
  CHECK(chain_seed(1ull << 40, 0) != chain_seed(0, 0));
}

TEST_CASE("conjugate normal posterior is recovered") {
  const double prec = 1.0 / (kS0 * kS0) + 1.0 / (kS * kS);
  const double post_sd = std::sqrt(1.0 / prec);
  const double post_mean = (kM0 / (kS0 * kS0) + kY / (kS * kS)) / prec;
  const auto draws = run_chains(conjugate_target, small_config(4, 5000, 1000, 11));
  CHECK(draws.n_chains == 4);
  CHECK(draws.n_draws == 4000);
  const auto all = draws.param(0);
  double mean = 0.0;
  for (double v : all) mean += v;
  mean /= static_cast<double>(all.size());
  double var = 0.0;
  for (double v : all) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(all.size() - 1));
  std::vector<std::span<const double>> chains;
  for (std::size_t ch = 0; ch < 4; ++ch) chains.push_back(draws.chain(0, ch));
  const double n_eff = ess(chains);
  const double mcse_mean = sd / std::sqrt(n_eff);
  const double mcse_sd = sd / std::sqrt(2.0 * n_eff);
  CHECK(std::abs(mean - post_mean) < 3 * mcse_mean);
  CHECK(std::abs(sd - post_sd) < 3 * mcse_sd);
  for (std::size_t ch = 0; ch < 4; ++ch) {
    double m = 0.0;
    for (double v : draws.chain(0, ch)) m += v;
    m /= static_cast<double>(draws.n_draws);
    CHECK(std::abs(m - post_mean) < 3 * 2.0 * mcse_mean);
  }
  CHECK(rhat(chains) < 1.01);
}

TEST_CASE("one update from the stationary law keeps it and balances up and down moves") {
  // Detailed balance implies the pair (x, x') is exchangeable, so up and down moves are
  // equally likely and x' has the target marginal. The positive parameter exercises the
  // log transform and its Jacobian.
  std::mt19937_64 rng(2024);
  std::gamma_distribution<double> gamma(3.0, 1.0);
  std::normal_distribution<double> z(0.0, 1.0);
  const int n = 40000;
  for (std::size_t site : {0u, 1u}) {
    std::vector<double> after;
    int up = 0;
    int down = 0;
    for (int k = 0; k < n; ++k) {
      const double a = gamma(rng);
      const double b = a + z(rng);
      DenseTarget target({{"a", 0.0, kInf, 0.8}, {"b", -kInf, kInf, 1.5}}, {a, b}, gamma_normal);
      const double before = target.value(site);
      metropolis_update(target, site, target.info(site).initial_scale, rng);
      const double x = target.value(site);
      up += x > before;
      down += x < before;
      after.push_back(target.value(0));
    }
    const double se = std::sqrt(static_cast<double>(up + down));
    CHECK(std::abs(up - down) < 4 * se);
    CHECK(ks_distance(after, gamma3_cdf) < 1.63 / std::sqrt(static_cast<double>(n)) * 1.5);
  }
}

TEST_CASE("scales are frozen after warmup") {
  std::mt19937_64 rng(1);
  DenseTarget target({{"a", 0.0, kInf, 0.1}, {"b", -kInf, kInf, 5.0}}, {2.0, 2.0}, gamma_normal);
  auto config = small_config(1, 3000, 1000, 1);
  const auto result = run_chain(target, config, 0, rng);
  CHECK(result.scale_at_warmup_end == result.scale_final);
  CHECK(result.scale_final[0] != 0.1);
  CHECK(result.n_kept == 2000);
  CHECK(result.draws.size() == 2 * 2000);
  for (double rate : result.accept_rate) {
    CHECK(rate > 0.2);
    CHECK(rate < 0.7);
  }
}

TEST_CASE("thinning keeps (iter - warmup) / thin draws") {
  std::mt19937_64 rng(1);
  DenseTarget target({{"a", 0.0, kInf, 0.5}, {"b", -kInf, kInf, 1.0}}, {2.0, 2.0}, gamma_normal);
  auto config = small_config(1, 1037, 100, 1);
  config.thin = 10;
  const auto result = run_chain(target, config, 0, rng);
  CHECK(result.n_kept == 93);
  CHECK(result.draws.size() == 2 * 93);
}

TEST_CASE("run_chains is deterministic and independent of the thread count") {
  auto factory = [](std::mt19937_64& rng) {
    std::gamma_distribution<double> g(3.0, 1.0);
    const double a = g(rng);
    return std::make_unique<DenseTarget>(std::vector<ParamInfo>{{"a", 0.0, kInf, 0.5}, {"b", -kInf, kInf, 1.0}},
                                         std::vector<double>{a, a}, gamma_normal);
  };
  const auto config = small_config(5, 600, 200, 42);
  setenv("BPOP_THREADS", "1", 1);
  const auto serial = run_chains(factory, config);
  setenv("BPOP_THREADS", "3", 1);
  const auto parallel = run_chains(factory, config);
  const auto again = run_chains(factory, config);
  unsetenv("BPOP_THREADS");
  CHECK(serial == parallel);
  CHECK(parallel == again);
  CHECK(serial.names == std::vector<std::string>{"a", "b"});
  CHECK(serial.chain_seeds.size() == 5);
  CHECK(serial.chain_seeds[3] == chain_seed(42, 3));
  CHECK(serial.values.size() == 2 * 5 * 400);
  auto other = config;
  other.seed = 43;
  CHECK(run_chains(factory, other).values != serial.values);
}

TEST_CASE("chain failures are aggregated with chain ids") {
  auto factory = [](std::mt19937_64& rng) -> std::unique_ptr<Target> {
    const auto first = rng();
    if (first % 2 == 0) throw std::runtime_error("bad start");
    return std::make_unique<DenseTarget>(std::vector<ParamInfo>{{"x", -kInf, kInf, 1.0}}, std::vector<double>{0.0},
                                         [](const std::vector<double>& x) { return -0.5 * x[0] * x[0]; });
  };
  auto config = small_config(8, 20, 10, 5);
  std::vector<std::size_t> failing;
  for (std::size_t ch = 0; ch < 8; ++ch) {
    std::mt19937_64 rng(chain_seed(5, ch));
    if (rng() % 2 == 0) failing.push_back(ch);
  }
  REQUIRE(!failing.empty());
  try {
    run_chains(factory, config);
    FAIL("expected an error");
  } catch (const std::runtime_error& e) {
    const std::string what = e.what();
    for (auto ch : failing) CHECK(what.find("chain " + std::to_string(ch) + ": bad start") != std::string::npos);
  }
}
