#include "bpop/process_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "bpop/distributions.hpp"

namespace bpop {

LatentState make_state(const PopulationDataset& data) {
  const std::size_t C = data.num_counties();
  const std::size_t T = data.num_years();
  const std::size_t R = data.num_races();
  const std::size_t K = data.pep_last > data.t_ref ? data.pep_last - data.t_ref : 0;
  LatentState s;
  s.eta_ctr = Grid3<double>(C, T, R, 0.0);
  s.eta_cr = Grid2<double>(C, R, 0.0);
  s.eta_c.assign(C, 0.0);
  s.error.sigma_ns_cr = Grid2<double>(C, R, 1.0);
  s.error.sigma_ns_c.assign(C, 1.0);
  s.error.delta_ctr = Grid3<double>(C, K, R, 1.0);
  s.error.delta_first = data.t_ref + 1;
  s.error.delta_cr = Grid2<double>(C, R, 1.0);
  s.error.delta_c.assign(C, 1.0);
  s.error.chi_c.assign(C, 0.91);
  s.error.rho = 0.5;
  return s;
}

double rw2_logprior(std::span<const double> eta, double eta_cr, double sigma_ref, double sigma_eta,
                    std::size_t t_ref) {
  if (!(sigma_ref > 0.0) || !(sigma_eta > 0.0)) throw std::invalid_argument("rw2_logprior: sds must be positive");
  const std::size_t T = eta.size();
  if (T < 3 || t_ref < 1 || t_ref >= T) throw std::invalid_argument("rw2_logprior: need T >= 3 and 1 <= t_ref < T");
  double total = normal_logpdf(eta[t_ref], eta_cr, sigma_ref) + normal_logpdf(eta[t_ref - 1], eta_cr, sigma_ref);
  for (std::size_t t = t_ref + 1; t < T; ++t) {
    total += normal_logpdf(eta[t], 2.0 * eta[t - 1] - eta[t - 2], sigma_eta);
  }
  for (std::size_t t = t_ref - 1; t-- > 0;) {
    total += normal_logpdf(eta[t], 2.0 * eta[t + 1] - eta[t + 2], sigma_eta);
  }
  return total;
}

double hierarchy_logprior(const Grid2<double>& eta_cr, std::span<const double> eta_c, double eta_global,
                          double phi, double omega, const PriorConstants& priors) {
  if (!(phi > 0.0) || !(omega > 0.0)) throw std::invalid_argument("hierarchy_logprior: sds must be positive");
  double total = normal_logpdf(eta_global, priors.eta_global_mean, priors.eta_global_sd);
  for (std::size_t c = 0; c < eta_c.size(); ++c) {
    total += normal_logpdf(eta_c[c], eta_global, omega);
    for (std::size_t r = 0; r < eta_cr.cols(); ++r) total += normal_logpdf(eta_cr(c, r), eta_c[c], phi);
  }
  return total;
}

double hyperprior_logdensity(const LatentState& state, const PriorConstants& priors) {
  const Truncation half{0.0, kInf};
  const double scale = priors.process_sd_scale;
  return truncated_normal_logpdf(state.sigma_ref, 0.0, scale, half) +
         truncated_normal_logpdf(state.sigma_eta, 0.0, scale, half) +
         truncated_normal_logpdf(state.phi, 0.0, scale, half) +
         truncated_normal_logpdf(state.omega, 0.0, scale, half);
}

double process_logprior(const LatentState& state, std::size_t t_ref) {
  const auto& eta = state.eta_ctr;
  std::vector<double> series(eta.dim1());
  double total = 0.0;
  for (std::size_t c = 0; c < eta.dim0(); ++c) {
    for (std::size_t r = 0; r < eta.dim2(); ++r) {
      for (std::size_t t = 0; t < series.size(); ++t) series[t] = eta(c, t, r);
      total += rw2_logprior(series, state.eta_cr(c, r), state.sigma_ref, state.sigma_eta, t_ref);
    }
  }
  return total;
}

namespace {

/// Least-squares line through (x, y); returns (intercept, slope).
std::pair<double, double> fit_line(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  return {my - slope * mx, slope};
}

double sample_sd(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

LatentState init_state(const PopulationDataset& data, std::mt19937_64& rng, const ModelConfig& config) {
  LatentState s = make_state(data);
  const std::size_t C = data.num_counties();
  const std::size_t T = data.num_years();
  const std::size_t R = data.num_races();
  std::normal_distribution<double> jitter(0.0, 1.0);
  std::uniform_real_distribution<double> central(0.25, 0.75);
  std::uniform_real_distribution<double> spread(-0.25, 0.25);

  std::vector<double> second_diffs;
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t r = 0; r < R; ++r) {
      std::vector<double> xs;
      std::vector<double> ys;
      for (std::size_t t = 0; t < T; ++t) {
        if (data.has_pep(c, t, r)) {
          xs.push_back(static_cast<double>(t));
          ys.push_back(std::log(data.n_pep(c, t, r)));
        }
      }
      if (xs.empty() && data.has_census(c, r)) {
        xs.push_back(static_cast<double>(data.t_ref));
        ys.push_back(std::log(data.n_census(c, r)));
      }
      std::vector<double> series(T, 0.0);
      if (!xs.empty()) {
        const std::size_t edge = std::min<std::size_t>(3, xs.size());
        const auto head = fit_line(std::span(xs).first(edge), std::span(ys).first(edge));
        const auto tail = fit_line(std::span(xs).last(edge), std::span(ys).last(edge));
        std::size_t next = 0;
        for (std::size_t t = 0; t < T; ++t) {
          const double x = static_cast<double>(t);
          while (next < xs.size() && xs[next] < x) ++next;
          if (next < xs.size() && xs[next] == x) {
            series[t] = ys[next];
          } else if (next == 0) {
            series[t] = head.first + head.second * x;
          } else if (next == xs.size()) {
            series[t] = tail.first + tail.second * x;
          } else {
            const double w = (x - xs[next - 1]) / (xs[next] - xs[next - 1]);
            series[t] = (1.0 - w) * ys[next - 1] + w * ys[next];
          }
        }
      }
      for (std::size_t t = 0; t < T; ++t) s.eta_ctr(c, t, r) = series[t] + config.init_jitter * jitter(rng);
      for (std::size_t t = 2; t < T; ++t) {
        second_diffs.push_back(s.eta_ctr(c, t, r) - 2.0 * s.eta_ctr(c, t - 1, r) + s.eta_ctr(c, t - 2, r));
      }
      s.eta_cr(c, r) = 0.5 * (s.eta_ctr(c, data.t_ref, r) + s.eta_ctr(c, data.t_ref - 1, r));
    }
  }

  std::vector<double> cr_dev;
  std::vector<double> anchor_dev;
  for (std::size_t c = 0; c < C; ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < R; ++r) sum += s.eta_cr(c, r);
    s.eta_c[c] = sum / static_cast<double>(R);
    for (std::size_t r = 0; r < R; ++r) {
      cr_dev.push_back(s.eta_cr(c, r) - s.eta_c[c]);
      anchor_dev.push_back(s.eta_ctr(c, data.t_ref, r) - s.eta_cr(c, r));
    }
  }
  s.eta_global = std::accumulate(s.eta_c.begin(), s.eta_c.end(), 0.0) / static_cast<double>(C);

  auto positive = [&](double estimate, double floor) { return std::max(estimate, floor) * std::exp(spread(rng)); };
  s.sigma_eta = positive(sample_sd(second_diffs), 1e-3);
  s.sigma_ref = positive(std::sqrt(2.0) * sample_sd(anchor_dev), 1e-3);
  s.phi = positive(sample_sd(cr_dev), 0.05);
  s.omega = positive(sample_sd(s.eta_c), 0.05);

  const auto& priors = config.priors;
  const double scale = priors.error_sd_scale;
  const Truncation half{0.0, kInf};
  auto draw = [&](double mean, double sd, Truncation bounds) {
    return truncated_normal_quantile(central(rng), mean, sd, bounds);
  };
  auto& e = s.error;
  for (std::size_t c = 0; c < C; ++c) {
    e.sigma_ns_c[c] = draw(0.0, scale, half);
    e.delta_c[c] = draw(0.0, scale, half);
    e.chi_c[c] = std::clamp(priors.chi_mean, priors.chi_bounds.lower, priors.chi_bounds.upper);
    for (std::size_t r = 0; r < R; ++r) {
      e.sigma_ns_cr(c, r) = draw(e.sigma_ns_c[c], scale, half);
      e.delta_cr(c, r) = draw(e.delta_c[c], scale, half);
      for (std::size_t k = 0; k < e.delta_ctr.dim1(); ++k) {
        e.delta_ctr(c, k, r) = draw(e.delta_cr(c, r), scale, priors.delta_ctr_bounds);
      }
    }
  }
  e.rho = 0.5;
  return s;
}

}  // namespace bpop
