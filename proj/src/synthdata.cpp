#include "bpop/synthdata.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "bpop/csv.hpp"
#include "bpop/likelihood.hpp"

namespace bpop {

void SimConfig::validate() const {
  if (counties < 1 || races < 1) throw std::invalid_argument("simulation needs at least one county and race");
  if (end_year - start_year + 1 < 3) throw std::invalid_argument("simulation needs at least three years");
  if (tref_year <= start_year || tref_year > end_year) throw std::invalid_argument("tref_year out of range");
  if (pep_first_year < start_year || pep_last_year > end_year || pep_first_year > pep_last_year ||
      pep_first_year > tref_year || pep_last_year < tref_year) {
    throw std::invalid_argument("PEP years must lie in the model range and include tref_year");
  }
  if (acs_first_end_year - static_cast<int>(kPeriodLength) + 1 < start_year || acs_last_end_year > end_year ||
      acs_first_end_year > acs_last_end_year) {
    throw std::invalid_argument("ACS periods must lie in the model range");
  }
  for (double v : {omega, phi, sigma_ref, sigma_eta, sigma_ns, delta, acs_se_constant}) {
    if (!(v >= 0.0)) throw std::invalid_argument("simulation sds must be nonnegative");
  }
  if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("rho must lie in [0, 1]");
}

namespace {

std::string county_label(std::size_t c) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "C%02zu", c + 1);
  return buf;
}

std::vector<std::string> race_labels(std::size_t R) {
  if (R == 1) return {"white"};
  if (R == 2) return {"black", "white"};
  std::vector<std::string> out;
  for (std::size_t r = 0; r < R; ++r) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "race%02zu", r + 1);
    out.emplace_back(buf);
  }
  return out;
}

}  // namespace

SimTruth simulate_truth(const SimConfig& sim, std::mt19937_64& rng) {
  sim.validate();
  SimTruth truth;
  for (std::size_t c = 0; c < sim.counties; ++c) truth.counties.push_back(county_label(c));
  truth.races = race_labels(sim.races);
  for (int y = sim.start_year; y <= sim.end_year; ++y) truth.years.push_back(y);
  truth.t_ref = static_cast<std::size_t>(sim.tref_year - sim.start_year);
  const std::size_t C = sim.counties;
  const std::size_t R = sim.races;
  const std::size_t T = truth.years.size();
  const std::size_t tref = truth.t_ref;
  const std::size_t K = static_cast<std::size_t>(sim.pep_last_year - sim.tref_year);
  std::normal_distribution<double> z(0.0, 1.0);

  auto& s = truth.state;
  s.eta_ctr = Grid3<double>(C, T, R);
  s.eta_cr = Grid2<double>(C, R);
  s.eta_c.assign(C, 0.0);
  s.eta_global = sim.eta_global;
  s.sigma_eta = sim.sigma_eta;
  s.sigma_ref = sim.sigma_ref;
  s.phi = sim.phi;
  s.omega = sim.omega;
  for (std::size_t c = 0; c < C; ++c) {
    s.eta_c[c] = sim.eta_global + sim.omega * z(rng);
    for (std::size_t r = 0; r < R; ++r) {
      s.eta_cr(c, r) = s.eta_c[c] + sim.phi * z(rng);
      s.eta_ctr(c, tref, r) = s.eta_cr(c, r) + sim.sigma_ref * z(rng);
      s.eta_ctr(c, tref - 1, r) = s.eta_cr(c, r) + sim.sigma_ref * z(rng);
      for (std::size_t t = tref + 1; t < T; ++t) {
        s.eta_ctr(c, t, r) = 2.0 * s.eta_ctr(c, t - 1, r) - s.eta_ctr(c, t - 2, r) + sim.sigma_eta * z(rng);
      }
      for (std::size_t t = tref - 1; t-- > 0;) {
        s.eta_ctr(c, t, r) = 2.0 * s.eta_ctr(c, t + 1, r) - s.eta_ctr(c, t + 2, r) + sim.sigma_eta * z(rng);
      }
    }
  }
  auto& e = s.error;
  e.sigma_ns_cr = Grid2<double>(C, R, sim.sigma_ns);
  e.sigma_ns_c.assign(C, sim.sigma_ns);
  e.delta_ctr = Grid3<double>(C, K, R, sim.delta);
  e.delta_first = tref + 1;
  e.delta_cr = Grid2<double>(C, R, sim.delta);
  e.delta_c.assign(C, sim.delta);
  e.chi_c.assign(C, sim.chi);
  e.rho = sim.rho;

  truth.gamma = Grid3<double>(C, T, R);
  for (std::size_t i = 0; i < truth.gamma.size(); ++i) truth.gamma.flat()[i] = std::exp(s.eta_ctr.flat()[i]);
  return truth;
}

Eigen::MatrixXd semidefinite_cholesky(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  const double tol = 1e-12 * std::max(1.0, a.diagonal().cwiseAbs().maxCoeff());
  for (Eigen::Index j = 0; j < n; ++j) {
    double pivot = a(j, j);
    for (Eigen::Index k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
    if (pivot <= tol) continue;
    l(j, j) = std::sqrt(pivot);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double v = a(i, j);
      for (Eigen::Index k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / l(j, j);
    }
  }
  return l;
}

SimObservations simulate_observations(const SimTruth& truth, const SimConfig& sim, std::mt19937_64& rng) {
  sim.validate();
  SimObservations obs;
  auto& tables = obs.tables;
  const std::size_t C = truth.counties.size();
  const std::size_t R = truth.races.size();
  const std::size_t tref = truth.t_ref;
  const auto& e = truth.state.error;
  std::normal_distribution<double> z(0.0, 1.0);

  auto clamp = [&](double value, const std::string& key) {
    if (value < 1.0) {
      obs.clamped.push_back(key);
      return 1.0;
    }
    return value;
  };
  auto key_of = [&](const char* source, std::size_t c, std::size_t r, int year) {
    return std::string(source) + "(" + truth.counties[c] + ", " + truth.races[r] + ", " + std::to_string(year) + ")";
  };

  const auto year_index = [&](int year) { return static_cast<std::size_t>(year - truth.years.front()); };
  const std::size_t pep_first = year_index(sim.pep_first_year);
  const std::size_t pep_last = year_index(sim.pep_last_year);

  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t r = 0; r < R; ++r) {
      const double sigma_ns = e.sigma_ns_cr(c, r);
      const double census = truth.gamma(c, tref, r) * (1.0 - e.chi_c[c] / 100.0) + sigma_ns * z(rng);
      tables.census_rows.push_back({truth.counties[c], truth.races[r], truth.years[tref],
                                    clamp(census, key_of("census", c, r, truth.years[tref])), {}});

      std::vector<double> pep(truth.years.size(), 0.0);
      double walk = 0.0;
      double cumulative = sigma_ns * sigma_ns;
      for (std::size_t t = pep_first; t <= pep_last; ++t) {
        double error = 0.0;
        if (t > tref) {
          const double delta = e.delta_ctr(c, t - tref - 1, r);
          cumulative += delta * delta;
          walk += delta * z(rng);
          error = sim.pep_noise == PepNoise::independent ? std::sqrt(cumulative) * z(rng) : walk;
        } else {
          error = sigma_ns * z(rng);
          if (t == tref) walk = error;
        }
        pep[t] = clamp(truth.gamma(c, t, r) + error, key_of("pep", c, r, truth.years[t]));
        tables.pep_rows.push_back({truth.counties[c], truth.races[r], truth.years[t], pep[t], {}});
      }

      std::vector<int> ends;
      for (int end = sim.acs_first_end_year; end <= sim.acs_last_end_year; ++end) ends.push_back(end);
      const std::size_t P = ends.size();
      std::vector<double> tg(P);
      std::vector<double> s(P);
      for (std::size_t p = 0; p < P; ++p) {
        const std::size_t first = year_index(ends[p]) + 1 - kPeriodLength;
        std::array<double, kPeriodLength> counts{};
        for (std::size_t k = 0; k < kPeriodLength; ++k) {
          const std::size_t t = std::clamp(first + k, pep_first, pep_last);
          counts[k] = pep[t];
        }
        const auto w = pep_period_weights(counts);
        tg[p] = 0.0;
        for (std::size_t k = 0; k < kPeriodLength; ++k) tg[p] += w[k] * truth.gamma(c, first + k, r);
        s[p] = sim.acs_se_constant * std::sqrt(tg[p]);
      }
      const auto sigma = build_acs_covariance(sigma_ns, s, e.rho);
      const auto l = semidefinite_cholesky(sigma);
      Eigen::VectorXd noise(static_cast<Eigen::Index>(P));
      for (Eigen::Index p = 0; p < noise.size(); ++p) noise(p) = z(rng);
      const Eigen::VectorXd draw = l * noise;
      for (std::size_t p = 0; p < P; ++p) {
        const double value = clamp(tg[p] + draw(static_cast<Eigen::Index>(p)), key_of("acs", c, r, ends[p]));
        tables.acs_rows.push_back({truth.counties[c], truth.races[r], ends[p], value, kMoeZ * s[p], {}});
      }
    }
  }

  // Tracts: fixed Dirichlet(1, ..., 1) shares per county applied to the county ACS counts.
  std::gamma_distribution<double> unit_gamma(1.0, 1.0);
  const std::size_t G = sim.tracts_per_county;
  std::vector<std::vector<double>> shares(C);
  for (std::size_t c = 0; c < C; ++c) {
    double total = 0.0;
    for (std::size_t g = 0; g < G; ++g) {
      shares[c].push_back(unit_gamma(rng));
      total += shares[c].back();
    }
    for (double& v : shares[c]) v /= total;
  }
  if (G > 0) {
    for (const auto& row : tables.acs_rows) {
      const auto c = static_cast<std::size_t>(std::stoul(row.county_id.substr(1)) - 1);
      for (std::size_t g = 0; g < G; ++g) {
        char tract[32];
        std::snprintf(tract, sizeof tract, "%s-T%02zu", row.county_id.c_str(), g + 1);
        tables.tract_acs_rows.push_back({row.county_id, tract, row.race, row.period_end_year, shares[c][g] * row.count, {}});
      }
    }
  }
  return obs;
}

ModelConfig model_config_for(const SimConfig& sim) {
  ModelConfig config;
  config.start_year = sim.start_year;
  config.end_year = sim.end_year;
  config.tref_year = sim.tref_year;
  return config;
}

void write_truth(const SimTruth& truth, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "county_id,race,year,gamma,eta\n";
  for (std::size_t c = 0; c < truth.counties.size(); ++c) {
    for (std::size_t r = 0; r < truth.races.size(); ++r) {
      for (std::size_t t = 0; t < truth.years.size(); ++t) {
        out << truth.counties[c] << ',' << truth.races[r] << ',' << truth.years[t] << ','
            << csv::format_double(truth.gamma(c, t, r)) << ',' << csv::format_double(truth.state.eta_ctr(c, t, r))
            << '\n';
      }
    }
  }
}

}  // namespace bpop
