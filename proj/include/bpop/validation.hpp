#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "bpop/ingest.hpp"
#include "bpop/sampler.hpp"

namespace bpop {

enum class TestSource : std::uint8_t { pep, acs };

/// An observation removed from the training data. index is a year index for PEP and a
/// period index for ACS.
struct TestCell {
  TestSource source{TestSource::pep};
  std::size_t county{0};
  std::size_t index{0};
  std::size_t race{0};
  double observed{0.0};
};

struct HoldoutSplit {
  PopulationDataset train;
  std::vector<TestCell> test;
};

/// Masks PEP counts in the holdout years and ACS periods whose end year is held out.
/// Deviations that use a held-out PEP count are masked too. Census is never held out.
HoldoutSplit split_dataset(const PopulationDataset& data, const std::set<int>& holdout_years);

struct SourceMetrics {
  std::size_t n_left_out{0};
  double mde{0.0};
  double mae{0.0};
  double me{0.0};
  double mse{0.0};
  double prop_below{0.0};
  double prop_above{0.0};
};

/// Metrics from per-cell log-scale errors and interval exceedance flags.
SourceMetrics metrics_from_errors(std::span<const double> errors, std::span<const std::uint8_t> below,
                                  std::span<const std::uint8_t> above);

struct CellResult {
  TestSource source{TestSource::pep};
  std::size_t county{0};
  int year{0};  // calendar year (period end year for ACS)
  std::size_t race{0};
  double observed{0.0};
  double median{0.0};  // count scale
  double lo95{0.0};
  double hi95{0.0};
  double error{0.0};  // log(observed) - log(median)
  bool consistent{false};  // ACS compared against the weighted period mean
};

struct ValidationOptions {
  /// Widen the prediction interval with source-specific observation noise.
  bool observation_noise{false};
  std::uint64_t seed{0};
};

struct ValidationReport {
  SourceMetrics pep;
  SourceMetrics acs;  // compared against eta at the period end year
  SourceMetrics acs_consistent;  // compared against the weighted period mean
  std::vector<CellResult> cells;
};

/// draws must come from a fit to the training set of the same dataset.
ValidationReport validation_metrics(const PosteriorDraws& draws, const PopulationDataset& data,
                                    const std::vector<TestCell>& test, const ValidationOptions& options = {});

void write_validation_json(const ValidationReport& report, const PopulationDataset& data,
                           const std::filesystem::path& path);

}  // namespace bpop
