#include "bpop/likelihood.hpp"

#include <cmath>
#include <vector>

#include "bpop/distributions.hpp"

namespace bpop {

double decennial_loglik(double n_census, double gamma_ref, double chi, double sigma_ns) {
  if (!(sigma_ns > 0.0)) throw std::invalid_argument("decennial_loglik: sigma_ns must be positive");
  return normal_logpdf(n_census, gamma_ref * (1.0 - chi / 100.0), sigma_ns);
}

double pep_loglik(double n_pep, double gamma, double var_pep) {
  if (!(var_pep > 0.0)) throw std::invalid_argument("pep_loglik: variance must be positive");
  return normal_logpdf(n_pep, gamma, std::sqrt(var_pep));
}

double deviation_loglik(double d, double delta) {
  if (delta < 0.0 || std::isnan(delta)) throw std::invalid_argument("deviation_loglik: negative delta");
  if (delta == 0.0) {
    if (d == 0.0) throw std::invalid_argument("deviation_loglik: degenerate density (delta = 0, d = 0)");
    return kNegInf;
  }
  return normal_logpdf(d, 0.0, delta);
}

double acs_weighted_mean(std::span<const double> gammas, std::span<const double> weights) {
  if (gammas.size() != weights.size()) throw std::invalid_argument("acs_weighted_mean: length mismatch");
  double total = 0.0;
  for (std::size_t k = 0; k < gammas.size(); ++k) total += gammas[k] * weights[k];
  return total;
}

Eigen::MatrixXd build_acs_covariance(double sigma_ns, std::span<const double> s, double rho,
                                     std::optional<std::size_t> reference_period, double jitter) {
  const auto P = static_cast<Eigen::Index>(s.size());
  Eigen::VectorXd sd(P);
  for (Eigen::Index p = 0; p < P; ++p) {
    const bool ref = reference_period && *reference_period == static_cast<std::size_t>(p);
    sd(p) = std::sqrt(acs_total_variance(sigma_ns, s[p], ref));
  }
  Eigen::MatrixXd sigma = rho * sd * sd.transpose();
  for (Eigen::Index p = 0; p < P; ++p) sigma(p, p) = sd(p) * sd(p) + jitter;
  return sigma;
}

bool cholesky_lower(Eigen::MatrixXd& a, double& log_det, double& bad_pivot, std::size_t& bad_index) noexcept {
  const Eigen::Index n = a.rows();
  log_det = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    double pivot = a(j, j);
    for (Eigen::Index k = 0; k < j; ++k) pivot -= a(j, k) * a(j, k);
    if (!(pivot > 0.0) || !std::isfinite(pivot)) {
      bad_pivot = pivot;
      bad_index = static_cast<std::size_t>(j);
      return false;
    }
    const double ljj = std::sqrt(pivot);
    a(j, j) = ljj;
    log_det += 2.0 * std::log(ljj);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double v = a(i, j);
      for (Eigen::Index k = 0; k < j; ++k) v -= a(i, k) * a(j, k);
      a(i, j) = v / ljj;
    }
    for (Eigen::Index i = 0; i < j; ++i) a(i, j) = 0.0;
  }
  return true;
}

double acs_loglik(std::span<const double> n_acs, std::span<const double> tildegamma, const Eigen::MatrixXd& sigma,
                  std::span<const std::uint8_t> mask) {
  const std::size_t P = n_acs.size();
  if (tildegamma.size() != P || static_cast<std::size_t>(sigma.rows()) != P ||
      static_cast<std::size_t>(sigma.cols()) != P || (!mask.empty() && mask.size() != P)) {
    throw std::invalid_argument("acs_loglik: dimension mismatch");
  }
  std::vector<Eigen::Index> keep;
  for (std::size_t p = 0; p < P; ++p) {
    if (mask.empty() || mask[p]) keep.push_back(static_cast<Eigen::Index>(p));
  }
  const auto n = static_cast<Eigen::Index>(keep.size());
  if (n == 0) return 0.0;
  Eigen::MatrixXd a(n, n);
  Eigen::VectorXd resid(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    resid(i) = n_acs[keep[i]] - tildegamma[keep[i]];
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = sigma(keep[i], keep[j]);
  }
  double log_det = 0.0;
  double pivot = 0.0;
  std::size_t index = 0;
  if (!cholesky_lower(a, log_det, pivot, index)) {
    throw NotPositiveDefinite("ACS covariance is not positive definite (pivot " + std::to_string(pivot) +
                                  " at row " + std::to_string(keep[index]) + ")",
                              pivot, static_cast<std::size_t>(keep[index]));
  }
  a.triangularView<Eigen::Lower>().solveInPlace(resid);
  return -static_cast<double>(n) * kLogSqrt2Pi - 0.5 * log_det - 0.5 * resid.squaredNorm();
}

std::optional<std::size_t> acs_reference_period(const PopulationDataset& data, const ModelConfig& config) {
  if (!config.acs_reference_end_year) return std::nullopt;
  for (std::size_t p = 0; p < data.num_periods(); ++p) {
    if (data.acs_end_years[p] == *config.acs_reference_end_year) return p;
  }
  return std::nullopt;
}

namespace {

void require_not_nan(double v, const std::string& path) {
  if (std::isnan(v)) throw std::domain_error("NaN in " + path);
}

void check_nan(const LatentState& s) {
  for (std::size_t i = 0; i < s.eta_ctr.size(); ++i) {
    if (std::isnan(s.eta_ctr.flat()[i])) {
      const std::size_t R = s.eta_ctr.dim2();
      const std::size_t T = s.eta_ctr.dim1();
      throw std::domain_error("NaN in eta_ctr[" + std::to_string(i / (T * R)) + "," + std::to_string(i / R % T) +
                              "," + std::to_string(i % R) + "]");
    }
  }
  for (std::size_t i = 0; i < s.eta_cr.size(); ++i) require_not_nan(s.eta_cr.flat()[i], "eta_cr");
  for (double v : s.eta_c) require_not_nan(v, "eta_c");
  require_not_nan(s.eta_global, "eta_global");
  require_not_nan(s.sigma_eta, "sigma_eta");
  require_not_nan(s.sigma_ref, "sigma_ref");
  require_not_nan(s.phi, "phi");
  require_not_nan(s.omega, "omega");
  const auto& e = s.error;
  for (double v : e.sigma_ns_cr.flat()) require_not_nan(v, "sigma_ns_cr");
  for (double v : e.sigma_ns_c) require_not_nan(v, "sigma_ns_c");
  for (double v : e.delta_ctr.flat()) require_not_nan(v, "delta_ctr");
  for (double v : e.delta_cr.flat()) require_not_nan(v, "delta_cr");
  for (double v : e.delta_c) require_not_nan(v, "delta_c");
  for (double v : e.chi_c) require_not_nan(v, "chi_c");
  require_not_nan(e.rho, "rho");
}

}  // namespace

JointTerms joint_terms(const LatentState& s, const PopulationDataset& data, const ModelConfig& config) {
  check_nan(s);
  JointTerms terms;
  const std::size_t C = data.num_counties();
  const std::size_t T = data.num_years();
  const std::size_t R = data.num_races();
  const std::size_t P = data.num_periods();
  const auto& e = s.error;

  // Outside the support the offending term alone is -inf.
  auto outside = [](double JointTerms::*term) {
    JointTerms out;
    out.*term = kNegInf;
    return out;
  };
  for (double v : s.eta_ctr.flat()) {
    if (!std::isfinite(v)) return outside(&JointTerms::process);
  }
  if (!(s.sigma_ref > 0.0 && s.sigma_eta > 0.0 && s.phi > 0.0 && s.omega > 0.0)) {
    return outside(&JointTerms::process_hyper);
  }
  for (double v : e.sigma_ns_cr.flat()) {
    if (!(v > 0.0)) return outside(&JointTerms::error_hyper);
  }

  terms.process_hyper = hyperprior_logdensity(s, config.priors);
  terms.error_hyper = error_hyperprior_logdensity(e, config.priors);
  if (terms.process_hyper == kNegInf) return outside(&JointTerms::process_hyper);
  if (terms.error_hyper == kNegInf) return outside(&JointTerms::error_hyper);
  terms.process = process_logprior(s, data.t_ref);
  terms.hierarchy = hierarchy_logprior(s.eta_cr, s.eta_c, s.eta_global, s.phi, s.omega, config.priors);

  const auto ref_period = acs_reference_period(data, config);
  std::vector<double> n_acs(P);
  std::vector<double> tg(P);
  std::vector<double> sds(P);
  std::vector<std::uint8_t> mask(P);
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t r = 0; r < R; ++r) {
      const double sigma_ns = e.sigma_ns_cr(c, r);
      if (data.has_census(c, r)) {
        terms.decennial += decennial_loglik(data.n_census(c, r), std::exp(s.eta_ctr(c, data.t_ref, r)), e.chi_c[c],
                                            sigma_ns);
      }
      double cumulative = sigma_ns * sigma_ns;
      for (std::size_t t = data.t_ref; t < T; ++t) {
        if (t >= e.delta_first && t - e.delta_first < e.delta_ctr.dim1()) {
          const double delta = e.delta_ctr(c, t - e.delta_first, r);
          cumulative += delta * delta;
          if (data.has_d(c, t, r)) terms.deviation += deviation_loglik(data.d(c, t, r), delta);
        }
        if (data.has_pep(c, t, r)) terms.pep += pep_loglik(data.n_pep(c, t, r), std::exp(s.eta_ctr(c, t, r)), cumulative);
      }
      bool any = false;
      for (std::size_t p = 0; p < P; ++p) {
        mask[p] = data.has_acs(c, p, r);
        any = any || mask[p];
        n_acs[p] = data.n_acs(c, p, r);
        sds[p] = data.s_acs(c, p, r);
        const auto first = data.period_start(p);
        const auto& w = data.pep_weights(c, p, r);
        double mean = 0.0;
        for (std::size_t k = 0; k < kPeriodLength; ++k) mean += w[k] * std::exp(s.eta_ctr(c, first + k, r));
        tg[p] = mean;
      }
      if (!any) continue;
      const auto sigma = build_acs_covariance(sigma_ns, sds, e.rho, ref_period, config.acs_jitter);
      try {
        terms.acs += acs_loglik(n_acs, tg, sigma, mask);
      } catch (const NotPositiveDefinite&) {
        return outside(&JointTerms::acs);
      }
    }
  }
  return terms;
}

double joint_loglik(const LatentState& state, const PopulationDataset& data, const ModelConfig& config) {
  return joint_terms(state, data, config).total();
}

}  // namespace bpop
