#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "bpop/ingest.hpp"
#include "bpop/sampler.hpp"

namespace bpop {

enum class SummaryTransform { identity, exp };

struct SummaryRow {
  std::string name;
  double median{0.0};
  double lo95{0.0};
  double hi95{0.0};
  double mean{0.0};
  double sd{0.0};
};

/// Linear interpolation between order statistics: h = (n - 1) p, x[floor h] + frac(h) (x[ceil h] - x[floor h]).
/// sorted must be ascending and non-empty.
double quantile_sorted(std::span<const double> sorted, double p);

/// Summary of pooled draws. For the exp transform, quantiles are exp of the log-scale
/// quantiles (so they commute with the transform exactly); mean and sd are of exp(draw).
SummaryRow summarize_values(std::span<const double> draws, SummaryTransform transform, std::string name = {});

/// One row per parameter, in registry order.
std::vector<SummaryRow> summarize(const PosteriorDraws& draws, SummaryTransform transform);

/// Writes summary.csv: entity,year,race,median,lo95,hi95,mean,sd. eta_ctr rows are reported
/// as counts (exp transform) keyed by county/year/race; other parameters by name.
void write_summary_csv(const PosteriorDraws& draws, const PopulationDataset& data, const std::filesystem::path& path);

/// Tract shares of the county total.
std::vector<double> tract_proportions(std::span<const double> tract_counts);

/// Tract shares for one county, race and ACS period.
struct TractShareSet {
  std::size_t county{0};
  std::size_t race{0};
  int period_end_year{0};
  std::vector<std::string> tract_ids;
  std::vector<double> shares;
};

struct TractWeights {
  std::vector<TractShareSet> sets;

  /// Share set used for a calendar year: the period ending that year, the earliest period
  /// for earlier years and the latest for later ones. Throws if the county has none.
  const TractShareSet& for_year(std::size_t county, std::size_t race, int year,
                                const std::vector<std::string>& county_labels) const;
};

TractWeights tract_proportions(const PopulationDataset& data);

struct TractEstimate {
  std::size_t county{0};
  std::string tract_id;
  std::size_t year{0};  // year index
  std::size_t race{0};
  std::vector<double> draws;  // pooled, count scale
  SummaryRow summary;
};

/// County count draws times tract shares for every county, tract, year and race.
std::vector<TractEstimate> tract_estimates(const PosteriorDraws& draws, const PopulationDataset& data,
                                           const TractWeights& weights);

/// Pooled count-scale draws of gamma for one cell.
std::vector<double> gamma_draws(const PosteriorDraws& draws, const PopulationDataset& data, std::size_t c,
                                std::size_t t, std::size_t r);

void write_tract_csv(const std::vector<TractEstimate>& estimates, const PopulationDataset& data,
                     const std::filesystem::path& path);

}  // namespace bpop
