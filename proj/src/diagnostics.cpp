#include "bpop/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace bpop {

namespace {

double mean_of(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double var_of(std::span<const double> x, double mean) {
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(x.size() - 1);
}

}  // namespace

double rhat(const std::vector<std::span<const double>>& chains) {
  if (chains.size() < 2) throw std::invalid_argument("rhat: need at least two chains");
  const std::size_t n_full = chains.front().size();
  for (const auto& ch : chains) {
    if (ch.size() != n_full) throw std::invalid_argument("rhat: chains differ in length");
  }
  if (n_full < 4) throw std::invalid_argument("rhat: need at least four draws per chain");
  const std::size_t n = n_full / 2;
  std::vector<std::span<const double>> halves;
  for (const auto& ch : chains) {
    halves.push_back(ch.first(n));
    halves.push_back(ch.last(n));
  }
  const double m = static_cast<double>(halves.size());
  std::vector<double> means;
  double w = 0.0;
  for (const auto& h : halves) {
    means.push_back(mean_of(h));
    w += var_of(h, means.back());
  }
  w /= m;
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / m;
  double b_over_n = 0.0;
  for (double mu : means) b_over_n += (mu - grand) * (mu - grand);
  b_over_n /= m - 1.0;
  if (w == 0.0) return b_over_n == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  const double nd = static_cast<double>(n);
  const double var_plus = (nd - 1.0) / nd * w + b_over_n;
  return std::sqrt(var_plus / w);
}

double ess(const std::vector<std::span<const double>>& chains) {
  if (chains.empty()) throw std::invalid_argument("ess: no chains");
  const std::size_t n = chains.front().size();
  for (const auto& ch : chains) {
    if (ch.size() != n) throw std::invalid_argument("ess: chains differ in length");
  }
  const std::size_t m = chains.size();
  if (n * m < 8 || n < 4) throw std::invalid_argument("ess: need at least eight draws");
  const double nd = static_cast<double>(n);
  const double md = static_cast<double>(m);

  std::vector<double> means(m);
  for (std::size_t c = 0; c < m; ++c) means[c] = mean_of(chains[c]);
  // Autocovariance at lag t averaged over chains, normalized by n.
  auto mean_acov = [&](std::size_t lag) {
    double total = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
      const auto& x = chains[c];
      double s = 0.0;
      for (std::size_t i = 0; i + lag < n; ++i) s += (x[i] - means[c]) * (x[i + lag] - means[c]);
      total += s / nd;
    }
    return total / md;
  };

  const double acov0 = mean_acov(0);
  const double w = acov0 * nd / (nd - 1.0);
  double var_plus = w * (nd - 1.0) / nd;
  if (m > 1) {
    const double grand = std::accumulate(means.begin(), means.end(), 0.0) / md;
    double b = 0.0;
    for (double mu : means) b += (mu - grand) * (mu - grand);
    var_plus += b / (md - 1.0);
  }
  if (!(var_plus > 0.0)) return 1.0;

  // Mirrors the initial positive / initial monotone sequence estimator used by Stan.
  std::vector<double> rho(n + 2, 0.0);
  auto rho_at = [&](std::size_t lag) { return 1.0 - (w - mean_acov(lag)) / var_plus; };
  double even = 1.0;
  double odd = rho_at(1);
  rho[0] = even;
  rho[1] = odd;
  std::size_t s = 1;
  while (s < n - 4 && even + odd > 0.0) {
    even = rho_at(s + 1);
    odd = rho_at(s + 2);
    if (even + odd >= 0.0) {
      rho[s + 1] = even;
      rho[s + 2] = odd;
    }
    s += 2;
  }
  const std::size_t max_s = s;
  if (even > 0.0) rho[max_s + 1] = even;
  for (std::size_t k = 1; k + 3 <= max_s; k += 2) {
    const double prev = rho[k - 1] + rho[k];
    if (rho[k + 1] + rho[k + 2] > prev) {
      rho[k + 1] = prev / 2.0;
      rho[k + 2] = prev / 2.0;
    }
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < max_s; ++k) sum += rho[k];
  sum += rho[max_s + 1] / 2.0;
  double tau = -1.0 + 2.0 * sum;
  tau = std::max(tau, 1.0 / std::log10(md * nd));
  return md * nd / tau;
}

double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw std::invalid_argument("ks_distance: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

}  // namespace bpop
