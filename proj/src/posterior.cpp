#include "bpop/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <stdexcept>

#include "bpop/bpop_target.hpp"
#include "bpop/csv.hpp"

namespace bpop {

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

SummaryRow summarize_values(std::span<const double> draws, SummaryTransform transform, std::string name) {
  if (draws.empty()) throw std::invalid_argument("no draws for parameter " + name);
  std::vector<double> sorted(draws.begin(), draws.end());
  std::sort(sorted.begin(), sorted.end());
  SummaryRow row;
  row.name = std::move(name);
  row.median = quantile_sorted(sorted, 0.5);
  row.lo95 = quantile_sorted(sorted, 0.025);
  row.hi95 = quantile_sorted(sorted, 0.975);
  if (transform == SummaryTransform::exp) {
    row.median = std::exp(row.median);
    row.lo95 = std::exp(row.lo95);
    row.hi95 = std::exp(row.hi95);
    for (double& v : sorted) v = std::exp(v);
  }
  const double n = static_cast<double>(sorted.size());
  row.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : sorted) ss += (v - row.mean) * (v - row.mean);
  row.sd = sorted.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return row;
}

std::vector<SummaryRow> summarize(const PosteriorDraws& draws, SummaryTransform transform) {
  std::vector<SummaryRow> rows;
  rows.reserve(draws.num_params());
  for (std::size_t i = 0; i < draws.num_params(); ++i) rows.push_back(summarize_values(draws.param(i), transform, draws.names[i]));
  return rows;
}

namespace {

void require_registry(const PosteriorDraws& draws, const PopulationDataset& data) {
  if (draws.names != parameter_registry(data)) {
    throw std::invalid_argument("draws do not match the parameter registry of the dataset");
  }
}

std::size_t eta_index(const PopulationDataset& data, std::size_t c, std::size_t t, std::size_t r) {
  return (c * data.num_years() + t) * data.num_races() + r;  // eta_ctr leads the registry
}

}  // namespace

void write_summary_csv(const PosteriorDraws& draws, const PopulationDataset& data, const std::filesystem::path& path) {
  require_registry(draws, data);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  using csv::format_double;
  out << "entity,year,race,median,lo95,hi95,mean,sd\n";
  const auto sites = parameter_sites(data);
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const auto& s = sites[i];
    SummaryRow row;
    if (s.kind == ParamKind::eta_ctr) {
      row = summarize_values(draws.param(i), SummaryTransform::exp);
      out << csv::escape(data.counties[s.c]) << ',' << data.years[s.t] << ',' << csv::escape(data.races[s.r]);
    } else {
      row = summarize_values(draws.param(i), SummaryTransform::identity);
      out << csv::escape(draws.names[i]) << ",,";
    }
    out << ',' << format_double(row.median) << ',' << format_double(row.lo95) << ',' << format_double(row.hi95)
        << ',' << format_double(row.mean) << ',' << format_double(row.sd) << '\n';
  }
}

std::vector<double> tract_proportions(std::span<const double> tract_counts) {
  double total = 0.0;
  for (double v : tract_counts) {
    if (!(v >= 0.0)) throw std::invalid_argument("tract counts must be nonnegative");
    total += v;
  }
  if (!(total > 0.0)) throw std::invalid_argument("tract counts sum to zero");
  std::vector<double> out;
  out.reserve(tract_counts.size());
  for (double v : tract_counts) out.push_back(v / total);
  return out;
}

TractWeights tract_proportions(const PopulationDataset& data) {
  std::map<std::tuple<std::size_t, std::size_t, int>, std::vector<const TractObservation*>> groups;
  for (const auto& obs : data.tracts) groups[{obs.county, obs.race, obs.period_end_year}].push_back(&obs);
  TractWeights weights;
  for (const auto& [key, members] : groups) {
    TractShareSet set;
    std::tie(set.county, set.race, set.period_end_year) = key;
    std::vector<const TractObservation*> sorted = members;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto* a, const auto* b) { return a->tract_id < b->tract_id; });
    std::vector<double> counts;
    for (const auto* obs : sorted) {
      set.tract_ids.push_back(obs->tract_id);
      counts.push_back(obs->count);
    }
    try {
      set.shares = tract_proportions(counts);
    } catch (const std::invalid_argument&) {
      throw std::invalid_argument("all tract counts are zero for county " + data.counties[set.county] + ", race " +
                                  data.races[set.race] + ", period ending " + std::to_string(set.period_end_year));
    }
    weights.sets.push_back(std::move(set));
  }
  return weights;
}

const TractShareSet& TractWeights::for_year(std::size_t county, std::size_t race, int year,
                                            const std::vector<std::string>& county_labels) const {
  const TractShareSet* earliest = nullptr;
  const TractShareSet* latest = nullptr;
  const TractShareSet* at_or_before = nullptr;
  for (const auto& set : sets) {
    if (set.county != county || set.race != race) continue;
    if (!earliest || set.period_end_year < earliest->period_end_year) earliest = &set;
    if (!latest || set.period_end_year > latest->period_end_year) latest = &set;
    if (set.period_end_year <= year && (!at_or_before || set.period_end_year > at_or_before->period_end_year)) {
      at_or_before = &set;
    }
  }
  if (!earliest) {
    throw std::invalid_argument("no tract weights for county " +
                                (county < county_labels.size() ? county_labels[county] : std::to_string(county)));
  }
  if (year <= earliest->period_end_year) return *earliest;
  if (year >= latest->period_end_year) return *latest;
  // The period ending in year; a gap in the tract periods falls back to the latest earlier one.
  return *at_or_before;
}

std::vector<double> gamma_draws(const PosteriorDraws& draws, const PopulationDataset& data, std::size_t c,
                                std::size_t t, std::size_t r) {
  const auto column = draws.param(eta_index(data, c, t, r));
  std::vector<double> out(column.size());
  std::transform(column.begin(), column.end(), out.begin(), [](double eta) { return std::exp(eta); });
  return out;
}

std::vector<TractEstimate> tract_estimates(const PosteriorDraws& draws, const PopulationDataset& data,
                                           const TractWeights& weights) {
  require_registry(draws, data);
  std::vector<bool> has_weights(data.num_counties(), false);
  for (const auto& set : weights.sets) has_weights[set.county] = true;
  std::string missing;
  for (std::size_t c = 0; c < data.num_counties(); ++c) {
    if (!has_weights[c]) missing += (missing.empty() ? "" : ", ") + data.counties[c];
  }
  if (!missing.empty()) throw std::invalid_argument("counties without tract weights: " + missing);

  std::vector<TractEstimate> out;
  for (std::size_t c = 0; c < data.num_counties(); ++c) {
    for (std::size_t r = 0; r < data.num_races(); ++r) {
      bool any = false;
      for (const auto& set : weights.sets) any = any || (set.county == c && set.race == r);
      if (!any) continue;
      for (std::size_t t = 0; t < data.num_years(); ++t) {
        const auto county = gamma_draws(draws, data, c, t, r);
        const auto& set = weights.for_year(c, r, data.years[t], data.counties);
        for (std::size_t g = 0; g < set.tract_ids.size(); ++g) {
          TractEstimate est;
          est.county = c;
          est.tract_id = set.tract_ids[g];
          est.year = t;
          est.race = r;
          est.draws.resize(county.size());
          for (std::size_t k = 0; k < county.size(); ++k) est.draws[k] = county[k] * set.shares[g];
          est.summary = summarize_values(est.draws, SummaryTransform::identity, est.tract_id);
          out.push_back(std::move(est));
        }
      }
    }
  }
  return out;
}

void write_tract_csv(const std::vector<TractEstimate>& estimates, const PopulationDataset& data,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  using csv::format_double;
  out << "county,tract,year,race,median,lo95,hi95\n";
  for (const auto& e : estimates) {
    out << csv::escape(data.counties[e.county]) << ',' << csv::escape(e.tract_id) << ',' << data.years[e.year] << ','
        << csv::escape(data.races[e.race]) << ',' << format_double(e.summary.median) << ','
        << format_double(e.summary.lo95) << ',' << format_double(e.summary.hi95) << '\n';
  }
}

}  // namespace bpop
