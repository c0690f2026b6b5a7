#include "bpop/bpop_target.hpp"

#include <cmath>
#include <stdexcept>

#include "bpop/distributions.hpp"
#include "bpop/likelihood.hpp"

namespace bpop {

namespace {

/// Normal log-density without argument checks; -inf for a nonpositive sd.
inline double lognorm(double x, double mean, double sd) noexcept {
  if (!(sd > 0.0)) return kNegInf;
  const double z = (x - mean) / sd;
  return -kLogSqrt2Pi - std::log(sd) - 0.5 * z * z;
}

inline double half_normal(double x, double mean, double scale) noexcept {
  return truncated_normal_logpdf(x, mean, scale, Truncation{0.0, kInf});
}

}  // namespace

std::vector<ParamSite> parameter_sites(const PopulationDataset& data) {
  const auto C = static_cast<std::uint32_t>(data.num_counties());
  const auto T = static_cast<std::uint32_t>(data.num_years());
  const auto R = static_cast<std::uint32_t>(data.num_races());
  const auto K = static_cast<std::uint32_t>(data.pep_last > data.t_ref ? data.pep_last - data.t_ref : 0);
  std::vector<ParamSite> sites;
  for (std::uint32_t c = 0; c < C; ++c)
    for (std::uint32_t t = 0; t < T; ++t)
      for (std::uint32_t r = 0; r < R; ++r) sites.push_back({ParamKind::eta_ctr, c, t, r});
  for (std::uint32_t c = 0; c < C; ++c)
    for (std::uint32_t r = 0; r < R; ++r) sites.push_back({ParamKind::eta_cr, c, 0, r});
  for (std::uint32_t c = 0; c < C; ++c) sites.push_back({ParamKind::eta_c, c, 0, 0});
  for (auto kind : {ParamKind::eta_global, ParamKind::sigma_ref, ParamKind::sigma_eta, ParamKind::phi,
                    ParamKind::omega}) {
    sites.push_back({kind, 0, 0, 0});
  }
  for (std::uint32_t c = 0; c < C; ++c)
    for (std::uint32_t r = 0; r < R; ++r) sites.push_back({ParamKind::sigma_ns_cr, c, 0, r});
  for (std::uint32_t c = 0; c < C; ++c) sites.push_back({ParamKind::sigma_ns_c, c, 0, 0});
  for (std::uint32_t c = 0; c < C; ++c)
    for (std::uint32_t k = 0; k < K; ++k)
      for (std::uint32_t r = 0; r < R; ++r) sites.push_back({ParamKind::delta_ctr, c, k, r});
  for (std::uint32_t c = 0; c < C; ++c)
    for (std::uint32_t r = 0; r < R; ++r) sites.push_back({ParamKind::delta_cr, c, 0, r});
  for (std::uint32_t c = 0; c < C; ++c) sites.push_back({ParamKind::delta_c, c, 0, 0});
  for (std::uint32_t c = 0; c < C; ++c) sites.push_back({ParamKind::chi_c, c, 0, 0});
  sites.push_back({ParamKind::rho, 0, 0, 0});
  return sites;
}

std::string parameter_name(const PopulationDataset& data, const ParamSite& s) {
  const auto& county = data.counties[s.c];
  const auto& race = data.races[s.r];
  auto cr = [&](const char* base) { return std::string(base) + "[" + county + "," + race + "]"; };
  auto ctr = [&](const char* base, int year) {
    return std::string(base) + "[" + county + "," + std::to_string(year) + "," + race + "]";
  };
  switch (s.kind) {
    case ParamKind::eta_ctr: return ctr("eta_ctr", data.years[s.t]);
    case ParamKind::eta_cr: return cr("eta_cr");
    case ParamKind::eta_c: return "eta_c[" + county + "]";
    case ParamKind::eta_global: return "eta_global";
    case ParamKind::sigma_ref: return "sigma_ref";
    case ParamKind::sigma_eta: return "sigma_eta";
    case ParamKind::phi: return "phi";
    case ParamKind::omega: return "omega";
    case ParamKind::sigma_ns_cr: return cr("sigma_ns_cr");
    case ParamKind::sigma_ns_c: return "sigma_ns_c[" + county + "]";
    case ParamKind::delta_ctr: return ctr("delta_ctr", data.years[data.t_ref + 1 + s.t]);
    case ParamKind::delta_cr: return cr("delta_cr");
    case ParamKind::delta_c: return "delta_c[" + county + "]";
    case ParamKind::chi_c: return "chi_c[" + county + "]";
    case ParamKind::rho: return "rho";
  }
  return {};
}

std::vector<std::string> parameter_registry(const PopulationDataset& data) {
  std::vector<std::string> names;
  for (const auto& site : parameter_sites(data)) names.push_back(parameter_name(data, site));
  return names;
}

BpopTarget::BpopTarget(std::shared_ptr<const PopulationDataset> data, ModelConfig config, LatentState init)
    : data_{std::move(data)}, config_{std::move(config)}, state_{std::move(init)} {
  const auto& d = *data_;
  const std::size_t C = d.num_counties();
  const std::size_t T = d.num_years();
  const std::size_t R = d.num_races();
  const std::size_t P = d.num_periods();
  ref_period_ = acs_reference_period(d, config_);
  sites_ = parameter_sites(d);
  infos_.reserve(sites_.size());
  const auto& priors = config_.priors;
  for (const auto& s : sites_) {
    ParamInfo info;
    info.name = parameter_name(d, s);
    switch (s.kind) {
      case ParamKind::eta_ctr:
      case ParamKind::eta_cr:
        info.initial_scale = 0.01;
        break;
      case ParamKind::eta_c:
      case ParamKind::eta_global:
        info.initial_scale = 0.1;
        break;
      case ParamKind::sigma_ref:
      case ParamKind::sigma_eta:
      case ParamKind::phi:
      case ParamKind::omega:
        info.lower = 0.0;
        info.initial_scale = 0.1;
        break;
      case ParamKind::sigma_ns_cr:
      case ParamKind::sigma_ns_c:
      case ParamKind::delta_cr:
      case ParamKind::delta_c:
        info.lower = 0.0;
        info.initial_scale = 0.3;
        break;
      case ParamKind::delta_ctr:
        info.lower = priors.delta_ctr_bounds.lower;
        info.upper = priors.delta_ctr_bounds.upper;
        info.initial_scale = 0.3;
        break;
      case ParamKind::chi_c:
        info.lower = priors.chi_bounds.lower;
        info.upper = priors.chi_bounds.upper;
        info.initial_scale = 0.5;
        break;
      case ParamKind::rho:
        info.lower = 0.0;
        info.upper = 1.0;
        info.initial_scale = 0.5;
        break;
    }
    infos_.push_back(std::move(info));
  }

  gamma_ = Grid3<double>(C, T, R);
  for (std::size_t i = 0; i < gamma_.size(); ++i) gamma_.flat()[i] = std::exp(state_.eta_ctr.flat()[i]);

  periods_of_year_.assign(T, {});
  for (std::size_t p = 0; p < P; ++p) {
    for (std::size_t k = 0; k < kPeriodLength; ++k) periods_of_year_[d.period_start(p) + k].emplace_back(p, k);
  }

  blocks_.assign(C * R, {});
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t r = 0; r < R; ++r) {
      auto& b = blocks_[c * R + r];
      for (std::size_t p = 0; p < P; ++p) {
        if (d.has_acs(c, p, r)) b.keep.push_back(static_cast<Eigen::Index>(p));
      }
      b.active = !b.keep.empty();
      b.tildegamma = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(P));
      refresh_block(c, r);
    }
  }
  for (std::uint32_t c = 0; c < C; ++c) {
    for (std::uint32_t r = 0; r < R; ++r) {
      for (std::size_t k = d.t_ref; k + 2 <= T; ++k) moves_.push_back({c, r, static_cast<std::uint32_t>(k), true});
      for (std::size_t k = 1; k + 1 <= d.t_ref; ++k) moves_.push_back({c, r, static_cast<std::uint32_t>(k), false});
    }
  }
  saved_eta_.reserve(T);
  scratch_chol_.resize(C * R);
  scratch_log_det_.resize(C * R);
  scratch_loglik_.resize(C * R);

  const auto terms = joint_terms(state_, d, config_);
  if (!std::isfinite(terms.total())) {
    const std::pair<const char*, double> named[] = {
        {"decennial", terms.decennial}, {"pep", terms.pep},           {"deviation", terms.deviation},
        {"acs", terms.acs},             {"process", terms.process},   {"hierarchy", terms.hierarchy},
        {"process_hyper", terms.process_hyper}, {"error_hyper", terms.error_hyper}};
    std::string bad;
    for (const auto& [name, value] : named) {
      if (!std::isfinite(value)) bad += std::string(bad.empty() ? "" : ", ") + name;
    }
    throw std::runtime_error("non-finite joint density at initialization (terms: " + bad + ")");
  }
}

void BpopTarget::refresh_block(std::size_t c, std::size_t r) {
  const auto& d = *data_;
  auto& b = blocks_[c * d.num_races() + r];
  if (!b.active) return;
  for (std::size_t p = 0; p < d.num_periods(); ++p) {
    const auto& w = d.pep_weights(c, p, r);
    const auto first = d.period_start(p);
    double mean = 0.0;
    for (std::size_t k = 0; k < kPeriodLength; ++k) mean += w[k] * gamma_(c, first + k, r);
    b.tildegamma(static_cast<Eigen::Index>(p)) = mean;
  }
  if (!factor_block(c, r, state_.error.sigma_ns_cr(c, r), state_.error.rho, b.chol, b.log_det)) {
    b.loglik = kNegInf;
    return;
  }
  b.loglik = block_loglik(b, b.chol, b.log_det, b.tildegamma, c, r);
}

bool BpopTarget::factor_block(std::size_t c, std::size_t r, double sigma_ns, double rho, Eigen::MatrixXd& chol,
                              double& log_det) const {
  const auto& d = *data_;
  const auto& keep = blocks_[c * d.num_races() + r].keep;
  const auto n = static_cast<Eigen::Index>(keep.size());
  if (!(sigma_ns >= 0.0)) return false;
  chol.resize(n, n);
  Eigen::VectorXd sd(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto p = static_cast<std::size_t>(keep[i]);
    const double s = d.s_acs(c, p, r);
    const bool ref = ref_period_ && *ref_period_ == p;
    sd(i) = std::sqrt(sigma_ns * sigma_ns + (ref ? 0.0 : s * s));
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) chol(i, j) = rho * sd(i) * sd(j);
    chol(i, i) = sd(i) * sd(i) + config_.acs_jitter;
  }
  double pivot = 0.0;
  std::size_t index = 0;
  return cholesky_lower(chol, log_det, pivot, index);
}

double BpopTarget::block_loglik(const AcsBlock& b, const Eigen::MatrixXd& chol, double log_det,
                                const Eigen::VectorXd& tildegamma, std::size_t c, std::size_t r) const {
  const auto& d = *data_;
  const auto n = static_cast<Eigen::Index>(b.keep.size());
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto p = static_cast<std::size_t>(b.keep[i]);
    z(i) = d.n_acs(c, p, r) - tildegamma(b.keep[i]);
  }
  chol.triangularView<Eigen::Lower>().solveInPlace(z);
  return -static_cast<double>(n) * kLogSqrt2Pi - 0.5 * log_det - 0.5 * z.squaredNorm();
}

double& BpopTarget::slot(std::size_t i) {
  const auto& s = sites_[i];
  auto& e = state_.error;
  switch (s.kind) {
    case ParamKind::eta_ctr: return state_.eta_ctr(s.c, s.t, s.r);
    case ParamKind::eta_cr: return state_.eta_cr(s.c, s.r);
    case ParamKind::eta_c: return state_.eta_c[s.c];
    case ParamKind::eta_global: return state_.eta_global;
    case ParamKind::sigma_ref: return state_.sigma_ref;
    case ParamKind::sigma_eta: return state_.sigma_eta;
    case ParamKind::phi: return state_.phi;
    case ParamKind::omega: return state_.omega;
    case ParamKind::sigma_ns_cr: return e.sigma_ns_cr(s.c, s.r);
    case ParamKind::sigma_ns_c: return e.sigma_ns_c[s.c];
    case ParamKind::delta_ctr: return e.delta_ctr(s.c, s.t, s.r);
    case ParamKind::delta_cr: return e.delta_cr(s.c, s.r);
    case ParamKind::delta_c: return e.delta_c[s.c];
    case ParamKind::chi_c: return e.chi_c[s.c];
    case ParamKind::rho: return e.rho;
  }
  throw std::logic_error("unknown parameter kind");
}

double BpopTarget::value(std::size_t i) const { return const_cast<BpopTarget*>(this)->slot(i); }

double BpopTarget::rw2_term(std::size_t c, std::size_t j, std::size_t r) const {
  const auto& eta = state_.eta_ctr;
  const std::size_t tref = data_->t_ref;
  if (j == tref || j + 1 == tref) return lognorm(eta(c, j, r), state_.eta_cr(c, r), state_.sigma_ref);
  if (j > tref) return lognorm(eta(c, j, r), 2.0 * eta(c, j - 1, r) - eta(c, j - 2, r), state_.sigma_eta);
  return lognorm(eta(c, j, r), 2.0 * eta(c, j + 1, r) - eta(c, j + 2, r), state_.sigma_eta);
}

double BpopTarget::rw2_touching(std::size_t c, std::size_t t, std::size_t r) const {
  const std::size_t T = data_->num_years();
  const std::size_t tref = data_->t_ref;
  double total = rw2_term(c, t, r);
  // Forward terms at t+1, t+2 and backward terms at t-1, t-2 reference t.
  for (std::size_t j = t + 1; j <= t + 2 && j < T; ++j) {
    if (j > tref) total += rw2_term(c, j, r);
  }
  for (std::size_t back = 1; back <= 2 && back <= t; ++back) {
    const std::size_t j = t - back;
    if (j + 1 < tref) total += rw2_term(c, j, r);
  }
  return total;
}

double BpopTarget::census_term(std::size_t c, std::size_t r) const {
  const auto& d = *data_;
  if (!d.has_census(c, r)) return 0.0;
  return lognorm(d.n_census(c, r), gamma_(c, d.t_ref, r) * (1.0 - state_.error.chi_c[c] / 100.0),
                 state_.error.sigma_ns_cr(c, r));
}

double BpopTarget::pep_terms(std::size_t c, std::size_t r, std::size_t from) const {
  const auto& d = *data_;
  const auto& e = state_.error;
  const std::size_t T = d.num_years();
  const double sigma_ns = e.sigma_ns_cr(c, r);
  double cumulative = sigma_ns * sigma_ns;
  double total = 0.0;
  for (std::size_t t = d.t_ref; t < T; ++t) {
    if (t >= e.delta_first && t - e.delta_first < e.delta_ctr.dim1()) {
      const double delta = e.delta_ctr(c, t - e.delta_first, r);
      cumulative += delta * delta;
    }
    if (t >= from && d.has_pep(c, t, r)) total += lognorm(d.n_pep(c, t, r), gamma_(c, t, r), std::sqrt(cumulative));
  }
  return total;
}

double BpopTarget::local(std::size_t i, bool store) {
  const auto& s = sites_[i];
  const auto& d = *data_;
  const auto& e = state_.error;
  const auto& priors = config_.priors;
  const std::size_t C = d.num_counties();
  const std::size_t R = d.num_races();
  const std::size_t c = s.c;
  const std::size_t r = s.r;
  switch (s.kind) {
    case ParamKind::eta_ctr: {
      const std::size_t t = s.t;
      double total = rw2_touching(c, t, r);
      if (t == d.t_ref) total += census_term(c, r);
      if (t >= d.t_ref && d.has_pep(c, t, r)) total += pep_terms(c, r, t) - pep_terms(c, r, t + 1);
      const auto& b = blocks_[c * R + r];
      if (b.active && !periods_of_year_[t].empty()) {
        if (!store) return total + b.loglik;
        scratch_tg_ = b.tildegamma;
        for (const auto& [p, k] : periods_of_year_[t]) {
          const auto& w = d.pep_weights(c, p, r);
          const auto first = d.period_start(p);
          double mean = 0.0;
          for (std::size_t q = 0; q < kPeriodLength; ++q) mean += w[q] * gamma_(c, first + q, r);
          scratch_tg_(static_cast<Eigen::Index>(p)) = mean;
        }
        scratch_loglik_[0] = block_loglik(b, b.chol, b.log_det, scratch_tg_, c, r);
        total += scratch_loglik_[0];
      }
      return total;
    }
    case ParamKind::eta_cr:
      return rw2_term(c, d.t_ref, r) + rw2_term(c, d.t_ref - 1, r) +
             lognorm(state_.eta_cr(c, r), state_.eta_c[c], state_.phi);
    case ParamKind::eta_c: {
      double total = lognorm(state_.eta_c[c], state_.eta_global, state_.omega);
      for (std::size_t q = 0; q < R; ++q) total += lognorm(state_.eta_cr(c, q), state_.eta_c[c], state_.phi);
      return total;
    }
    case ParamKind::eta_global: {
      double total = lognorm(state_.eta_global, priors.eta_global_mean, priors.eta_global_sd);
      for (std::size_t k = 0; k < C; ++k) total += lognorm(state_.eta_c[k], state_.eta_global, state_.omega);
      return total;
    }
    case ParamKind::sigma_ref: {
      double total = half_normal(state_.sigma_ref, 0.0, priors.process_sd_scale);
      for (std::size_t k = 0; k < C; ++k)
        for (std::size_t q = 0; q < R; ++q) total += rw2_term(k, d.t_ref, q) + rw2_term(k, d.t_ref - 1, q);
      return total;
    }
    case ParamKind::sigma_eta: {
      double total = half_normal(state_.sigma_eta, 0.0, priors.process_sd_scale);
      const std::size_t T = d.num_years();
      for (std::size_t k = 0; k < C; ++k)
        for (std::size_t q = 0; q < R; ++q)
          for (std::size_t j = 0; j < T; ++j) {
            if (j != d.t_ref && j + 1 != d.t_ref) total += rw2_term(k, j, q);
          }
      return total;
    }
    case ParamKind::phi: {
      double total = half_normal(state_.phi, 0.0, priors.process_sd_scale);
      for (std::size_t k = 0; k < C; ++k)
        for (std::size_t q = 0; q < R; ++q) total += lognorm(state_.eta_cr(k, q), state_.eta_c[k], state_.phi);
      return total;
    }
    case ParamKind::omega: {
      double total = half_normal(state_.omega, 0.0, priors.process_sd_scale);
      for (std::size_t k = 0; k < C; ++k) total += lognorm(state_.eta_c[k], state_.eta_global, state_.omega);
      return total;
    }
    case ParamKind::sigma_ns_cr: {
      double total = half_normal(e.sigma_ns_cr(c, r), e.sigma_ns_c[c], priors.error_sd_scale) + census_term(c, r) +
                     pep_terms(c, r, 0);
      const auto& b = blocks_[c * R + r];
      if (b.active) {
        if (!store) return total + b.loglik;
        if (!factor_block(c, r, e.sigma_ns_cr(c, r), e.rho, scratch_chol_[0], scratch_log_det_[0])) {
          scratch_loglik_[0] = kNegInf;
        } else {
          scratch_loglik_[0] = block_loglik(b, scratch_chol_[0], scratch_log_det_[0], b.tildegamma, c, r);
        }
        total += scratch_loglik_[0];
      }
      return total;
    }
    case ParamKind::sigma_ns_c: {
      double total = half_normal(e.sigma_ns_c[c], 0.0, priors.error_sd_scale);
      for (std::size_t q = 0; q < R; ++q) total += half_normal(e.sigma_ns_cr(c, q), e.sigma_ns_c[c], priors.error_sd_scale);
      return total;
    }
    case ParamKind::delta_ctr: {
      const std::size_t t = e.delta_first + s.t;
      const double delta = e.delta_ctr(c, s.t, r);
      double total = truncated_normal_logpdf(delta, e.delta_cr(c, r), priors.error_sd_scale, priors.delta_ctr_bounds);
      if (d.has_d(c, t, r)) total += lognorm(d.d(c, t, r), 0.0, delta);
      return total + pep_terms(c, r, t);
    }
    case ParamKind::delta_cr: {
      double total = half_normal(e.delta_cr(c, r), e.delta_c[c], priors.error_sd_scale);
      for (std::size_t k = 0; k < e.delta_ctr.dim1(); ++k) {
        total += truncated_normal_logpdf(e.delta_ctr(c, k, r), e.delta_cr(c, r), priors.error_sd_scale,
                                         priors.delta_ctr_bounds);
      }
      return total;
    }
    case ParamKind::delta_c: {
      double total = half_normal(e.delta_c[c], 0.0, priors.error_sd_scale);
      for (std::size_t q = 0; q < R; ++q) total += half_normal(e.delta_cr(c, q), e.delta_c[c], priors.error_sd_scale);
      return total;
    }
    case ParamKind::chi_c: {
      double total = truncated_normal_logpdf(e.chi_c[c], priors.chi_mean, priors.chi_sd, priors.chi_bounds);
      for (std::size_t q = 0; q < R; ++q) total += census_term(c, q);
      return total;
    }
    case ParamKind::rho: {
      if (!(e.rho >= 0.0 && e.rho <= 1.0)) return kNegInf;
      double total = 0.0;
      for (std::size_t k = 0; k < C; ++k) {
        for (std::size_t q = 0; q < R; ++q) {
          const std::size_t id = k * R + q;
          const auto& b = blocks_[id];
          if (!b.active) continue;
          if (!store) {
            total += b.loglik;
            continue;
          }
          if (!factor_block(k, q, e.sigma_ns_cr(k, q), e.rho, scratch_chol_[id], scratch_log_det_[id])) {
            scratch_loglik_[id] = kNegInf;
          } else {
            scratch_loglik_[id] = block_loglik(b, scratch_chol_[id], scratch_log_det_[id], b.tildegamma, k, q);
          }
          total += scratch_loglik_[id];
        }
      }
      return total;
    }
  }
  throw std::logic_error("unknown parameter kind");
}

double BpopTarget::current_local(std::size_t i) { return local(i, false); }

double BpopTarget::proposed_local(std::size_t i, double v) {
  double& x = slot(i);
  const double old = x;
  const auto& s = sites_[i];
  const bool is_eta = s.kind == ParamKind::eta_ctr;
  const double old_gamma = is_eta ? gamma_(s.c, s.t, s.r) : 0.0;
  x = v;
  if (is_eta) gamma_(s.c, s.t, s.r) = std::exp(v);
  double out = kNegInf;
  if (std::isfinite(v) && (!is_eta || std::isfinite(gamma_(s.c, s.t, s.r)))) out = local(i, true);
  x = old;
  if (is_eta) gamma_(s.c, s.t, s.r) = old_gamma;
  scratch_site_ = i;
  scratch_value_ = v;
  scratch_move_ = static_cast<std::size_t>(-1);
  return out;
}

void BpopTarget::accept(std::size_t i, double v) {
  if (scratch_site_ != i || scratch_value_ != v) proposed_local(i, v);
  const auto& s = sites_[i];
  const std::size_t R = data_->num_races();
  slot(i) = v;
  switch (s.kind) {
    case ParamKind::eta_ctr: {
      gamma_(s.c, s.t, s.r) = std::exp(v);
      auto& b = blocks_[s.c * R + s.r];
      if (b.active && !periods_of_year_[s.t].empty()) {
        b.tildegamma.swap(scratch_tg_);
        b.loglik = scratch_loglik_[0];
      }
      break;
    }
    case ParamKind::sigma_ns_cr: {
      auto& b = blocks_[s.c * R + s.r];
      if (b.active) {
        b.chol.swap(scratch_chol_[0]);
        b.log_det = scratch_log_det_[0];
        b.loglik = scratch_loglik_[0];
      }
      break;
    }
    case ParamKind::rho:
      for (std::size_t id = 0; id < blocks_.size(); ++id) {
        auto& b = blocks_[id];
        if (!b.active) continue;
        b.chol.swap(scratch_chol_[id]);
        b.log_det = scratch_log_det_[id];
        b.loglik = scratch_loglik_[id];
      }
      break;
    default:
      break;
  }
  scratch_site_ = static_cast<std::size_t>(-1);
}

void BpopTarget::recompute_tildegamma(std::size_t c, std::size_t r, Eigen::VectorXd& out) const {
  const auto& d = *data_;
  out.resize(static_cast<Eigen::Index>(d.num_periods()));
  for (std::size_t p = 0; p < d.num_periods(); ++p) {
    const auto& w = d.pep_weights(c, p, r);
    const auto first = d.period_start(p);
    double mean = 0.0;
    for (std::size_t q = 0; q < kPeriodLength; ++q) mean += w[q] * gamma_(c, first + q, r);
    out(static_cast<Eigen::Index>(p)) = mean;
  }
}

void BpopTarget::shift_series(const KinkMove& mv, double b) {
  const std::size_t T = data_->num_years();
  if (mv.forward) {
    for (std::size_t t = mv.k + 1; t < T; ++t) {
      state_.eta_ctr(mv.c, t, mv.r) += b * static_cast<double>(t - mv.k);
      gamma_(mv.c, t, mv.r) = std::exp(state_.eta_ctr(mv.c, t, mv.r));
    }
  } else {
    for (std::size_t t = 0; t < mv.k; ++t) {
      state_.eta_ctr(mv.c, t, mv.r) += b * static_cast<double>(mv.k - t);
      gamma_(mv.c, t, mv.r) = std::exp(state_.eta_ctr(mv.c, t, mv.r));
    }
  }
}

double BpopTarget::move_local(std::size_t m, bool store) {
  const auto& mv = moves_[m];
  const auto& d = *data_;
  const std::size_t R = d.num_races();
  double total = rw2_term(mv.c, mv.forward ? mv.k + 1 : mv.k - 1, mv.r);
  if (mv.forward) total += pep_terms(mv.c, mv.r, mv.k + 1);
  const auto& b = blocks_[mv.c * R + mv.r];
  if (b.active) {
    if (!store) return total + b.loglik;
    recompute_tildegamma(mv.c, mv.r, scratch_tg_);
    scratch_loglik_[0] = block_loglik(b, b.chol, b.log_det, scratch_tg_, mv.c, mv.r);
    total += scratch_loglik_[0];
  }
  return total;
}

double BpopTarget::move_proposed_local(std::size_t m, double b) {
  const auto& mv = moves_[m];
  const std::size_t T = data_->num_years();
  saved_eta_.assign(T, 0.0);
  for (std::size_t t = 0; t < T; ++t) saved_eta_[t] = state_.eta_ctr(mv.c, t, mv.r);
  shift_series(mv, b);
  bool finite = true;
  for (std::size_t t = 0; t < T; ++t) finite = finite && std::isfinite(gamma_(mv.c, t, mv.r)) && gamma_(mv.c, t, mv.r) > 0.0;
  const double out = finite ? move_local(m, true) : kNegInf;
  for (std::size_t t = 0; t < T; ++t) {
    state_.eta_ctr(mv.c, t, mv.r) = saved_eta_[t];
    gamma_(mv.c, t, mv.r) = std::exp(saved_eta_[t]);
  }
  scratch_move_ = m;
  scratch_move_value_ = b;
  scratch_site_ = static_cast<std::size_t>(-1);
  return out;
}

void BpopTarget::move_accept(std::size_t m, double b) {
  if (scratch_move_ != m || scratch_move_value_ != b) move_proposed_local(m, b);
  const auto& mv = moves_[m];
  shift_series(mv, b);
  auto& block = blocks_[mv.c * data_->num_races() + mv.r];
  if (block.active) {
    block.tildegamma.swap(scratch_tg_);
    block.loglik = scratch_loglik_[0];
  }
  scratch_move_ = static_cast<std::size_t>(-1);
}

double BpopTarget::log_density() { return joint_loglik(state_, *data_, config_); }

}  // namespace bpop
