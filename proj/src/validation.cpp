#include "bpop/validation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "bpop/bpop_target.hpp"
#include "bpop/posterior.hpp"

namespace bpop {

HoldoutSplit split_dataset(const PopulationDataset& data, const std::set<int>& holdout_years) {
  for (int year : holdout_years) {
    if (data.years.empty() || year < data.years.front() || year > data.years.back()) {
      throw std::invalid_argument("holdout year " + std::to_string(year) + " is outside the modeled years");
    }
  }
  HoldoutSplit split{data, {}};
  auto& train = split.train;
  const std::size_t C = data.num_counties();
  const std::size_t T = data.num_years();
  const std::size_t R = data.num_races();
  bool pep_left = false;
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t t = 0; t < T; ++t) {
      const bool held = holdout_years.contains(data.years[t]);
      for (std::size_t r = 0; r < R; ++r) {
        if (!data.has_pep(c, t, r)) continue;
        if (held) {
          train.has_pep(c, t, r) = 0;
          split.test.push_back({TestSource::pep, c, t, r, data.n_pep(c, t, r)});
        } else {
          pep_left = true;
        }
      }
    }
  }
  bool any_pep = false;
  for (auto v : data.has_pep.flat()) any_pep = any_pep || v;
  if (any_pep && !pep_left) throw std::invalid_argument("holdout covers every PEP year");

  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t t = 1; t < T; ++t) {
      const bool held = holdout_years.contains(data.years[t]) || holdout_years.contains(data.years[t - 1]);
      for (std::size_t r = 0; r < R; ++r) {
        if (held) train.has_d(c, t, r) = 0;
      }
    }
  }
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t p = 0; p < data.num_periods(); ++p) {
      if (!holdout_years.contains(data.acs_end_years[p])) continue;
      for (std::size_t r = 0; r < R; ++r) {
        if (!data.has_acs(c, p, r)) continue;
        train.has_acs(c, p, r) = 0;
        split.test.push_back({TestSource::acs, c, p, r, data.n_acs(c, p, r)});
      }
    }
  }
  return split;
}

SourceMetrics metrics_from_errors(std::span<const double> errors, std::span<const std::uint8_t> below,
                                  std::span<const std::uint8_t> above) {
  SourceMetrics m;
  m.n_left_out = errors.size();
  if (errors.empty()) return m;
  const double n = static_cast<double>(errors.size());
  std::vector<double> e(errors.begin(), errors.end());
  std::vector<double> abs_e(e.size());
  std::transform(e.begin(), e.end(), abs_e.begin(), [](double v) { return std::abs(v); });
  std::sort(e.begin(), e.end());
  std::sort(abs_e.begin(), abs_e.end());
  m.mde = quantile_sorted(e, 0.5);
  m.mae = quantile_sorted(abs_e, 0.5);
  for (double v : errors) {
    m.me += v;
    m.mse += v * v;
  }
  m.me /= n;
  m.mse /= n;
  double nb = 0.0;
  double na = 0.0;
  for (auto b : below) nb += b ? 1.0 : 0.0;
  for (auto a : above) na += a ? 1.0 : 0.0;
  m.prop_below = nb / n;
  m.prop_above = na / n;
  return m;
}

namespace {

struct Tally {
  std::vector<double> errors;
  std::vector<std::uint8_t> below;
  std::vector<std::uint8_t> above;

  void add(const CellResult& cell) {
    errors.push_back(cell.error);
    below.push_back(cell.observed < cell.lo95);
    above.push_back(cell.observed > cell.hi95);
  }
  SourceMetrics metrics() const { return metrics_from_errors(errors, below, above); }
};

CellResult score(std::vector<double> draws, const TestCell& cell, int year, bool consistent) {
  std::sort(draws.begin(), draws.end());
  CellResult out;
  out.source = cell.source;
  out.county = cell.county;
  out.year = year;
  out.race = cell.race;
  out.observed = cell.observed;
  out.consistent = consistent;
  out.median = quantile_sorted(draws, 0.5);
  out.lo95 = quantile_sorted(draws, 0.025);
  out.hi95 = quantile_sorted(draws, 0.975);
  out.error = std::log(cell.observed) - std::log(out.median);
  return out;
}

/// Quantiles taken on the log scale and exponentiated, matching summarize().
CellResult score_log(std::span<const double> log_draws, const TestCell& cell, int year) {
  const auto row = summarize_values(log_draws, SummaryTransform::exp);
  CellResult out;
  out.source = cell.source;
  out.county = cell.county;
  out.year = year;
  out.race = cell.race;
  out.observed = cell.observed;
  out.median = row.median;
  out.lo95 = row.lo95;
  out.hi95 = row.hi95;
  out.error = std::log(cell.observed) - std::log(row.median);
  return out;
}

}  // namespace

ValidationReport validation_metrics(const PosteriorDraws& draws, const PopulationDataset& data,
                                    const std::vector<TestCell>& test, const ValidationOptions& options) {
  if (draws.names != parameter_registry(data)) {
    throw std::invalid_argument("draws do not match the parameter registry of the dataset");
  }
  ValidationReport report;
  Tally pep;
  Tally acs;
  Tally consistent;
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto sites = parameter_sites(data);
  auto index_of = [&](ParamKind kind, std::size_t c, std::size_t t, std::size_t r) {
    const ParamSite probe{kind, static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(t),
                          static_cast<std::uint32_t>(r)};
    return draws.index_of(parameter_name(data, probe));
  };
  const std::size_t n = draws.n_chains * draws.n_draws;

  for (const auto& cell : test) {
    if (cell.county >= data.num_counties() || cell.race >= data.num_races()) {
      throw std::invalid_argument("test cell outside the dataset");
    }
    if (cell.source == TestSource::pep) {
      if (cell.index >= data.num_years()) throw std::invalid_argument("PEP test cell outside the modeled years");
      const auto eta = draws.param(index_of(ParamKind::eta_ctr, cell.county, cell.index, cell.race));
      CellResult result;
      if (options.observation_noise) {
        const auto sigma = draws.param(index_of(ParamKind::sigma_ns_cr, cell.county, 0, cell.race));
        std::vector<std::span<const double>> deltas;
        for (std::size_t t = data.t_ref + 1; t <= cell.index && t <= data.pep_last; ++t) {
          deltas.push_back(draws.param(index_of(ParamKind::delta_ctr, cell.county, t - data.t_ref - 1, cell.race)));
        }
        std::vector<double> noisy(n);
        for (std::size_t k = 0; k < n; ++k) {
          double var = sigma[k] * sigma[k];
          for (const auto& d : deltas) var += d[k] * d[k];
          noisy[k] = std::exp(eta[k]) + std::sqrt(var) * normal(rng);
        }
        result = score(std::move(noisy), cell, data.years[cell.index], false);
        result.error = std::log(cell.observed) - summarize_values(eta, SummaryTransform::identity).median;
      } else {
        result = score_log(eta, cell, data.years[cell.index]);
      }
      pep.add(result);
      report.cells.push_back(result);
      continue;
    }

    if (cell.index >= data.num_periods()) throw std::invalid_argument("ACS test cell outside the periods");
    const int end_year = data.acs_end_years[cell.index];
    const auto end_t = data.year_index(end_year);
    const auto eta_end = draws.param(index_of(ParamKind::eta_ctr, cell.county, end_t, cell.race));
    const auto first = data.period_start(cell.index);
    const auto& w = data.pep_weights(cell.county, cell.index, cell.race);
    std::vector<double> tg(n, 0.0);
    for (std::size_t q = 0; q < kPeriodLength; ++q) {
      const auto eta = draws.param(index_of(ParamKind::eta_ctr, cell.county, first + q, cell.race));
      for (std::size_t k = 0; k < n; ++k) tg[k] += w[q] * std::exp(eta[k]);
    }
    CellResult literal;
    CellResult matched;
    if (options.observation_noise) {
      const auto sigma = draws.param(index_of(ParamKind::sigma_ns_cr, cell.county, 0, cell.race));
      const double s = data.s_acs(cell.county, cell.index, cell.race);
      std::vector<double> noisy_end(n);
      std::vector<double> noisy_tg(n);
      for (std::size_t k = 0; k < n; ++k) {
        const double sd = std::sqrt(sigma[k] * sigma[k] + s * s);
        noisy_end[k] = std::exp(eta_end[k]) + sd * normal(rng);
        noisy_tg[k] = tg[k] + sd * normal(rng);
      }
      literal = score(std::move(noisy_end), cell, end_year, false);
      literal.error = std::log(cell.observed) - summarize_values(eta_end, SummaryTransform::identity).median;
      std::vector<double> sorted_tg = tg;
      std::sort(sorted_tg.begin(), sorted_tg.end());
      const double tg_median = quantile_sorted(sorted_tg, 0.5);
      matched = score(std::move(noisy_tg), cell, end_year, true);
      matched.error = std::log(cell.observed) - std::log(tg_median);
    } else {
      literal = score_log(eta_end, cell, end_year);
      matched = score(std::move(tg), cell, end_year, true);
    }
    acs.add(literal);
    consistent.add(matched);
    report.cells.push_back(literal);
    report.cells.push_back(matched);
  }
  report.pep = pep.metrics();
  report.acs = acs.metrics();
  report.acs_consistent = consistent.metrics();
  return report;
}

void write_validation_json(const ValidationReport& report, const PopulationDataset& data,
                           const std::filesystem::path& path) {
  using nlohmann::json;
  auto metrics = [](const SourceMetrics& m) {
    return json{{"n_left_out", m.n_left_out}, {"MDE", m.mde},           {"MAE", m.mae},
                {"ME", m.me},                 {"MSE", m.mse},           {"prop_below", m.prop_below},
                {"prop_above", m.prop_above}};
  };
  json cells = json::array();
  for (const auto& c : report.cells) {
    cells.push_back({{"source", c.source == TestSource::pep ? "pep" : (c.consistent ? "acs_consistent" : "acs")},
                     {"county", data.counties[c.county]},
                     {"year", c.year},
                     {"race", data.races[c.race]},
                     {"observed", c.observed},
                     {"median", c.median},
                     {"lo95", c.lo95},
                     {"hi95", c.hi95},
                     {"log_error", c.error}});
  }
  const json j{{"pep", metrics(report.pep)},
               {"acs", metrics(report.acs)},
               {"acs_consistent", metrics(report.acs_consistent)},
               {"cells", cells}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace bpop
