#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bpop/config.hpp"
#include "bpop/grid.hpp"

namespace bpop {

// ---------------------------------------------------------------------------
// Raw source tables
// ---------------------------------------------------------------------------

struct CountRow {
  std::string county_id;
  std::string race;
  int year{0};
  double count{0.0};
  std::string origin;  // "file:line" for error messages; empty for in-memory rows
};

struct AcsRow {
  std::string county_id;
  std::string race;
  int period_end_year{0};
  double count{0.0};
  double moe{0.0};
  std::string origin;
};

struct TractRow {
  std::string county_id;
  std::string tract_id;
  std::string race;
  int period_end_year{0};
  double count{0.0};
  std::string origin;
};

struct SourceTables {
  std::vector<CountRow> census_rows;
  std::vector<CountRow> pep_rows;
  std::vector<AcsRow> acs_rows;
  std::vector<TractRow> tract_acs_rows;
};

/// Ingestion failure carrying every offending key found, not just the first.
class IngestError : public std::invalid_argument {
 public:
  IngestError(const std::string& what, std::vector<std::string> keys);
  const std::vector<std::string>& offending_keys() const noexcept { return keys_; }

 private:
  std::vector<std::string> keys_;
};

/// Reads census.csv, pep.csv, acs.csv and (if present) acs_tracts.csv from dir.
SourceTables read_source_tables(const std::filesystem::path& dir);
void write_source_tables(const SourceTables& tables, const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Deterministic transforms
// ---------------------------------------------------------------------------

inline constexpr double kMoeZ = 1.645;
inline constexpr std::size_t kPeriodLength = 5;

/// ACS margin of error (90% level) to standard error.
double moe_to_se(double moe, std::string_view location = {});

/// Proportion of each year's PEP count in the 5-year total. Counts must be positive.
std::array<double, kPeriodLength> pep_period_weights(std::span<const double, kPeriodLength> counts,
                                                     std::string_view context = {});

/// First differences of a PEP series over consecutive years.
std::vector<double> pep_annual_deviation(std::span<const int> years, std::span<const double> counts);

// ---------------------------------------------------------------------------
// Aligned dataset
// ---------------------------------------------------------------------------

enum class WeightSource : std::uint8_t { observed = 0, carried = 1, uniform = 2 };

struct TractObservation {
  std::size_t county{0};
  std::string tract_id;
  std::size_t race{0};
  int period_end_year{0};
  double count{0.0};

  bool operator==(const TractObservation&) const = default;
};

/// Observations aligned on county x year x race (and county x ACS period x race).
/// Unavailable cells hold 0 and are flagged false in the matching mask.
struct PopulationDataset {
  std::vector<std::string> counties;
  std::vector<std::string> races;
  std::vector<int> years;
  std::size_t t_ref{0};
  std::vector<int> acs_end_years;
  /// Index of the last year with any PEP count; delta parameters cover (t_ref, pep_last].
  std::size_t pep_last{0};

  Grid2<double> n_census;  // [c, r]
  Grid2<std::uint8_t> has_census;
  Grid3<double> n_pep;  // [c, t, r]
  Grid3<std::uint8_t> has_pep;
  Grid3<double> d;  // [c, t, r], d(t) = pep(t) - pep(t-1)
  Grid3<std::uint8_t> has_d;
  Grid3<double> n_acs;  // [c, p, r]
  Grid3<double> s_acs;
  Grid3<std::uint8_t> has_acs;
  Grid3<std::array<double, kPeriodLength>> pep_weights;  // [c, p, r][k], k-th year of period
  Grid3<WeightSource> pep_weight_source;
  std::vector<TractObservation> tracts;

  std::size_t num_counties() const noexcept { return counties.size(); }
  std::size_t num_races() const noexcept { return races.size(); }
  std::size_t num_years() const noexcept { return years.size(); }
  std::size_t num_periods() const noexcept { return acs_end_years.size(); }
  /// Year index of the first year covered by ACS period p.
  std::size_t period_start(std::size_t p) const noexcept {
    return static_cast<std::size_t>(acs_end_years[p] - static_cast<int>(kPeriodLength) + 1 - years.front());
  }
  std::size_t year_index(int year) const;

  bool operator==(const PopulationDataset&) const = default;
};

PopulationDataset build_dataset(const SourceTables& tables, const ModelConfig& config);

/// Copy of data with whole sources switched off in the availability masks.
PopulationDataset without_sources(PopulationDataset data, bool census, bool pep, bool acs);

void save_dataset(const PopulationDataset& data, const std::filesystem::path& path);
PopulationDataset load_dataset(const std::filesystem::path& path);

}  // namespace bpop
