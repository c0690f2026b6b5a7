#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "bpop/ingest.hpp"

namespace fixtures {

/// Two counties, two races, 2005-2021. PEP 2010-2019, ACS periods ending 2009-2018,
/// census in 2010, two tracts per county.
inline bpop::SourceTables ga_tables() {
  bpop::SourceTables t;
  const std::vector<std::string> counties{"13001", "13003"};
  const std::vector<std::string> races{"black", "white"};
  for (std::size_t c = 0; c < counties.size(); ++c) {
    for (std::size_t r = 0; r < races.size(); ++r) {
      const double base = 1000.0 * static_cast<double>(1 + c + 3 * r);
      t.census_rows.push_back({counties[c], races[r], 2010, base, ""});
      for (int y = 2010; y <= 2019; ++y) {
        t.pep_rows.push_back({counties[c], races[r], y, base + 10.0 * (y - 2010) + 3.0 * ((y * 7) % 5), ""});
      }
      for (int y = 2009; y <= 2018; ++y) {
        t.acs_rows.push_back({counties[c], races[r], y, base + 5.0 * (y - 2009), 1.645 * std::sqrt(base), ""});
        t.tract_acs_rows.push_back({counties[c], counties[c] + "01", races[r], y, 0.25 * base + y - 2009, ""});
        t.tract_acs_rows.push_back({counties[c], counties[c] + "02", races[r], y, 0.75 * base, ""});
      }
    }
  }
  return t;
}

/// One county, one race, 2005-2012 with PEP 2010-2012 and a single ACS period ending 2009.
inline bpop::SourceTables tiny_tables() {
  bpop::SourceTables t;
  t.census_rows.push_back({"A", "black", 2010, 1000.0, ""});
  t.pep_rows.push_back({"A", "black", 2010, 1005.0, ""});
  t.pep_rows.push_back({"A", "black", 2011, 1012.0, ""});
  t.pep_rows.push_back({"A", "black", 2012, 1016.0, ""});
  t.acs_rows.push_back({"A", "black", 2009, 990.0, 1.645 * 30.0, ""});
  return t;
}

inline bpop::ModelConfig tiny_config() {
  bpop::ModelConfig config;
  config.start_year = 2005;
  config.end_year = 2012;
  config.tref_year = 2010;
  return config;
}

/// Fresh empty directory under the system temp path.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("bpop_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline double normal_logpdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * M_PI);
}

/// log density of N(mean, sd^2) truncated below at 0.
inline double half_truncated_logpdf(double x, double mean, double sd) {
  if (x < 0.0) return -INFINITY;
  const double mass = 0.5 * std::erfc(-mean / sd / std::sqrt(2.0));
  return normal_logpdf(x, mean, sd) - std::log(mass);
}

}  // namespace fixtures

#include "bpop/process_model.hpp"

namespace fixtures {

/// Hand-set state for the tiny fixture: a gently curved series around log(1000).
inline bpop::LatentState tiny_state(const bpop::PopulationDataset& data) {
  auto s = bpop::make_state(data);
  for (std::size_t t = 0; t < data.num_years(); ++t) {
    const double x = static_cast<double>(t) - 5.0;
    s.eta_ctr(0, t, 0) = std::log(1000.0) + 0.004 * x + 0.0007 * x * x;
  }
  s.eta_cr(0, 0) = std::log(1000.0) + 0.01;
  s.eta_c[0] = 6.8;
  s.eta_global = 7.5;
  s.sigma_ref = 0.02;
  s.sigma_eta = 0.015;
  s.phi = 0.4;
  s.omega = 0.9;
  s.error.sigma_ns_cr(0, 0) = 12.0;
  s.error.sigma_ns_c[0] = 9.0;
  s.error.delta_ctr(0, 0, 0) = 6.0;
  s.error.delta_ctr(0, 1, 0) = 4.0;
  s.error.delta_cr(0, 0) = 5.0;
  s.error.delta_c[0] = 7.0;
  s.error.chi_c[0] = 1.3;
  s.error.rho = 0.35;
  return s;
}

}  // namespace fixtures

#include <functional>

#include "bpop/bpop_target.hpp"
#include "bpop/sampler.hpp"

namespace fixtures {

/// Draws over the full registry of data. eta_ctr values come from eta(c, t, r, k) where k
/// indexes pooled draws; every other parameter is 1.
inline bpop::PosteriorDraws fake_draws(const bpop::PopulationDataset& data, std::size_t chains, std::size_t n,
                                       const std::function<double(std::size_t, std::size_t, std::size_t, std::size_t)>& eta) {
  bpop::PosteriorDraws d;
  d.names = bpop::parameter_registry(data);
  d.n_chains = chains;
  d.n_draws = n;
  d.values.assign(d.names.size() * chains * n, 1.0);
  const auto sites = bpop::parameter_sites(data);
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (sites[i].kind != bpop::ParamKind::eta_ctr) continue;
    for (std::size_t k = 0; k < chains * n; ++k) {
      d.values[i * chains * n + k] = eta(sites[i].c, sites[i].t, sites[i].r, k);
    }
  }
  for (std::size_t ch = 0; ch < chains; ++ch) d.chain_seeds.push_back(ch + 1);
  return d;
}

}  // namespace fixtures
