#include "bpop/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "bpop/csv.hpp"

namespace bpop {

namespace {

constexpr std::size_t kMaxListedKeys = 20;

std::string join_keys(const std::vector<std::string>& keys) {
  std::ostringstream out;
  for (std::size_t i = 0; i < keys.size() && i < kMaxListedKeys; ++i) {
    out << (i == 0 ? "" : "; ") << keys[i];
  }
  if (keys.size() > kMaxListedKeys) out << "; ... (" << keys.size() - kMaxListedKeys << " more)";
  return out.str();
}

/// Accumulates problems of one kind and throws them together.
class Problems {
 public:
  explicit Problems(std::string what) : what_{std::move(what)} {}
  void add(std::string key) { keys_.push_back(std::move(key)); }
  void raise_if_any() const {
    if (!keys_.empty()) throw IngestError(what_ + ": " + join_keys(keys_), keys_);
  }

 private:
  std::string what_;
  std::vector<std::string> keys_;
};

std::string cell_key(const std::string& county, const std::string& race, int year) {
  return "(" + county + ", " + race + ", " + std::to_string(year) + ")";
}

std::string with_origin(std::string key, const std::string& origin) {
  return origin.empty() ? key : key + " at " + origin;
}

std::string origin_of(const csv::Table& table, std::size_t row) {
  return table.source + ":" + std::to_string(table.line_numbers[row]);
}

std::vector<CountRow> read_count_rows(const std::filesystem::path& path) {
  const auto table = csv::read_file(path);
  const auto county = table.column("county_id");
  const auto race = table.column("race");
  const auto year = table.column("year");
  const auto count = table.column("count");
  std::vector<CountRow> rows;
  rows.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& f = table.rows[i];
    const auto origin = origin_of(table, i);
    rows.push_back({f[county], f[race], csv::parse_int(f[year], origin),
                    csv::parse_double(f[count], origin), origin});
  }
  return rows;
}

}  // namespace

IngestError::IngestError(const std::string& what, std::vector<std::string> keys)
    : std::invalid_argument(what), keys_{std::move(keys)} {}

SourceTables read_source_tables(const std::filesystem::path& dir) {
  SourceTables tables;
  tables.census_rows = read_count_rows(dir / "census.csv");
  tables.pep_rows = read_count_rows(dir / "pep.csv");

  const auto acs = csv::read_file(dir / "acs.csv");
  {
    const auto county = acs.column("county_id");
    const auto race = acs.column("race");
    const auto end = acs.column("period_end_year");
    const auto count = acs.column("count");
    const auto moe = acs.column("moe");
    for (std::size_t i = 0; i < acs.rows.size(); ++i) {
      const auto& f = acs.rows[i];
      const auto origin = origin_of(acs, i);
      tables.acs_rows.push_back({f[county], f[race], csv::parse_int(f[end], origin),
                                 csv::parse_double(f[count], origin), csv::parse_double(f[moe], origin),
                                 origin});
    }
  }

  const auto tract_path = dir / "acs_tracts.csv";
  if (std::filesystem::exists(tract_path)) {
    const auto tracts = csv::read_file(tract_path);
    const auto county = tracts.column("county_id");
    const auto tract = tracts.column("tract_id");
    const auto race = tracts.column("race");
    const auto end = tracts.column("period_end_year");
    const auto count = tracts.column("count");
    for (std::size_t i = 0; i < tracts.rows.size(); ++i) {
      const auto& f = tracts.rows[i];
      const auto origin = origin_of(tracts, i);
      tables.tract_acs_rows.push_back({f[county], f[tract], f[race], csv::parse_int(f[end], origin),
                                       csv::parse_double(f[count], origin), origin});
    }
  }
  return tables;
}

void write_source_tables(const SourceTables& tables, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    return out;
  };
  using csv::escape;
  using csv::format_double;
  {
    auto out = open("census.csv");
    out << "county_id,race,year,count\n";
    for (const auto& row : tables.census_rows) {
      out << escape(row.county_id) << ',' << escape(row.race) << ',' << row.year << ','
          << format_double(row.count) << '\n';
    }
  }
  {
    auto out = open("pep.csv");
    out << "county_id,race,year,count\n";
    for (const auto& row : tables.pep_rows) {
      out << escape(row.county_id) << ',' << escape(row.race) << ',' << row.year << ','
          << format_double(row.count) << '\n';
    }
  }
  {
    auto out = open("acs.csv");
    out << "county_id,race,period_end_year,count,moe\n";
    for (const auto& row : tables.acs_rows) {
      out << escape(row.county_id) << ',' << escape(row.race) << ',' << row.period_end_year << ','
          << format_double(row.count) << ',' << format_double(row.moe) << '\n';
    }
  }
  {
    auto out = open("acs_tracts.csv");
    out << "county_id,tract_id,race,period_end_year,count\n";
    for (const auto& row : tables.tract_acs_rows) {
      out << escape(row.county_id) << ',' << escape(row.tract_id) << ',' << escape(row.race) << ','
          << row.period_end_year << ',' << format_double(row.count) << '\n';
    }
  }
}

double moe_to_se(double moe, std::string_view location) {
  if (!(moe >= 0.0)) {
    throw std::invalid_argument("negative or missing margin of error" +
                                (location.empty() ? std::string{} : " at " + std::string{location}));
  }
  return moe / kMoeZ;
}

std::array<double, kPeriodLength> pep_period_weights(std::span<const double, kPeriodLength> counts,
                                                     std::string_view context) {
  double total = 0.0;
  for (std::size_t k = 0; k < kPeriodLength; ++k) {
    if (!(counts[k] > 0.0)) {
      throw std::invalid_argument("PEP count must be positive for period weights" +
                                  (context.empty() ? std::string{} : " " + std::string{context}) +
                                  " (year offset " + std::to_string(k) + ")");
    }
    total += counts[k];
  }
  std::array<double, kPeriodLength> weights{};
  for (std::size_t k = 0; k < kPeriodLength; ++k) weights[k] = counts[k] / total;
  return weights;
}

std::vector<double> pep_annual_deviation(std::span<const int> years, std::span<const double> counts) {
  if (years.size() != counts.size()) throw std::invalid_argument("pep_annual_deviation: length mismatch");
  if (years.size() < 2) throw std::invalid_argument("pep_annual_deviation: need at least two years");
  std::vector<double> out;
  out.reserve(years.size() - 1);
  for (std::size_t i = 1; i < years.size(); ++i) {
    if (years[i] != years[i - 1] + 1) {
      throw std::invalid_argument("pep_annual_deviation: gap between " + std::to_string(years[i - 1]) +
                                  " and " + std::to_string(years[i]));
    }
    out.push_back(counts[i] - counts[i - 1]);
  }
  return out;
}

std::size_t PopulationDataset::year_index(int year) const {
  if (years.empty() || year < years.front() || year > years.back()) {
    throw std::out_of_range("year " + std::to_string(year) + " outside the modeled range");
  }
  return static_cast<std::size_t>(year - years.front());
}

PopulationDataset build_dataset(const SourceTables& tables, const ModelConfig& config) {
  if (config.end_year - config.start_year + 1 < 3) {
    throw std::invalid_argument("model year range must span at least three years");
  }
  if (config.tref_year <= config.start_year || config.tref_year > config.end_year) {
    throw std::invalid_argument("reference year must lie after the first model year and within the range");
  }
  if (tables.census_rows.empty()) throw IngestError("census table is empty", {});
  if (tables.pep_rows.empty()) throw IngestError("PEP table is empty (required for period weights)", {});

  PopulationDataset data;
  for (int y = config.start_year; y <= config.end_year; ++y) data.years.push_back(y);
  data.t_ref = static_cast<std::size_t>(config.tref_year - config.start_year);

  // Races and counties.
  if (config.races.empty()) {
    std::set<std::string> races;
    for (const auto& row : tables.census_rows) races.insert(row.race);
    data.races.assign(races.begin(), races.end());
  } else {
    data.races = config.races;
  }
  std::map<std::string, std::size_t> race_index;
  for (std::size_t r = 0; r < data.races.size(); ++r) race_index.emplace(data.races[r], r);
  auto modeled = [&](const std::string& race) { return race_index.contains(race); };

  std::set<std::string> counties;
  for (const auto& row : tables.census_rows) {
    if (modeled(row.race)) counties.insert(row.county_id);
  }
  if (counties.empty()) throw IngestError("no census rows for the modeled races", data.races);
  data.counties.assign(counties.begin(), counties.end());
  std::map<std::string, std::size_t> county_index;
  for (std::size_t c = 0; c < data.counties.size(); ++c) county_index.emplace(data.counties[c], c);

  const std::size_t C = data.counties.size();
  const std::size_t T = data.years.size();
  const std::size_t R = data.races.size();

  // Census.
  data.n_census = Grid2<double>(C, R, 0.0);
  data.has_census = Grid2<std::uint8_t>(C, R, 0);
  {
    Problems wrong_year("census rows outside the reference year");
    Problems duplicate("duplicate census keys");
    Problems nonpositive("census counts must be positive for modeled races");
    for (const auto& row : tables.census_rows) {
      if (!modeled(row.race)) continue;
      const auto key = with_origin(cell_key(row.county_id, row.race, row.year), row.origin);
      if (row.year != config.tref_year) {
        wrong_year.add(key);
        continue;
      }
      if (!(row.count > 0.0)) nonpositive.add(key);
      const auto c = county_index.at(row.county_id);
      const auto r = race_index.at(row.race);
      if (data.has_census(c, r)) duplicate.add(key);
      data.n_census(c, r) = row.count;
      data.has_census(c, r) = 1;
    }
    wrong_year.raise_if_any();
    duplicate.raise_if_any();
    nonpositive.raise_if_any();
    Problems missing("missing census count for modeled county-race cells");
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t r = 0; r < R; ++r) {
        if (!data.has_census(c, r)) missing.add("(" + data.counties[c] + ", " + data.races[r] + ")");
      }
    }
    missing.raise_if_any();
  }

  // PEP.
  data.n_pep = Grid3<double>(C, T, R, 0.0);
  data.has_pep = Grid3<std::uint8_t>(C, T, R, 0);
  {
    Problems unknown("PEP rows for counties without census counts");
    Problems out_of_range("PEP years outside the model range");
    Problems duplicate("duplicate PEP keys");
    Problems nonpositive("PEP counts must be positive for modeled races");
    std::size_t used = 0;
    for (const auto& row : tables.pep_rows) {
      if (!modeled(row.race)) continue;
      const auto key = with_origin(cell_key(row.county_id, row.race, row.year), row.origin);
      const auto county = county_index.find(row.county_id);
      if (county == county_index.end()) {
        unknown.add(key);
        continue;
      }
      if (row.year < config.start_year || row.year > config.end_year) {
        out_of_range.add(key);
        continue;
      }
      if (!(row.count > 0.0)) nonpositive.add(key);
      const auto t = data.year_index(row.year);
      const auto r = race_index.at(row.race);
      if (data.has_pep(county->second, t, r)) duplicate.add(key);
      data.n_pep(county->second, t, r) = row.count;
      data.has_pep(county->second, t, r) = 1;
      ++used;
    }
    unknown.raise_if_any();
    out_of_range.raise_if_any();
    duplicate.raise_if_any();
    nonpositive.raise_if_any();
    if (used == 0) throw IngestError("PEP table has no rows for the modeled races", data.races);
  }
  data.pep_last = data.t_ref;
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t r = 0; r < R; ++r) {
        if (data.has_pep(c, t, r)) data.pep_last = std::max(data.pep_last, t);
      }
    }
  }

  // Annual deviations.
  data.d = Grid3<double>(C, T, R, 0.0);
  data.has_d = Grid3<std::uint8_t>(C, T, R, 0);
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t r = 0; r < R; ++r) {
      for (std::size_t t = data.t_ref + 1; t < T; ++t) {
        if (data.has_pep(c, t, r) && data.has_pep(c, t - 1, r)) {
          const int years[2] = {data.years[t - 1], data.years[t]};
          const double counts[2] = {data.n_pep(c, t - 1, r), data.n_pep(c, t, r)};
          data.d(c, t, r) = pep_annual_deviation(years, counts).front();
          data.has_d(c, t, r) = 1;
        }
      }
    }
  }

  // ACS periods.
  {
    std::set<int> ends;
    Problems bad_period("ACS periods not contained in the model range");
    for (const auto& row : tables.acs_rows) {
      if (!modeled(row.race)) continue;
      if (row.period_end_year - static_cast<int>(kPeriodLength) + 1 < config.start_year ||
          row.period_end_year > config.end_year) {
        bad_period.add(with_origin(cell_key(row.county_id, row.race, row.period_end_year), row.origin));
        continue;
      }
      ends.insert(row.period_end_year);
    }
    bad_period.raise_if_any();
    data.acs_end_years.assign(ends.begin(), ends.end());
  }
  const std::size_t P = data.acs_end_years.size();
  std::map<int, std::size_t> period_index;
  for (std::size_t p = 0; p < P; ++p) period_index.emplace(data.acs_end_years[p], p);

  data.n_acs = Grid3<double>(C, P, R, 0.0);
  data.s_acs = Grid3<double>(C, P, R, 0.0);
  data.has_acs = Grid3<std::uint8_t>(C, P, R, 0);
  {
    Problems unknown("ACS rows for counties without census counts");
    Problems duplicate("duplicate ACS keys");
    Problems nonpositive("ACS counts must be positive for modeled races");
    Problems bad_moe("ACS margins of error must be nonnegative");
    for (const auto& row : tables.acs_rows) {
      if (!modeled(row.race)) continue;
      const auto key = with_origin(cell_key(row.county_id, row.race, row.period_end_year), row.origin);
      const auto county = county_index.find(row.county_id);
      if (county == county_index.end()) {
        unknown.add(key);
        continue;
      }
      if (!(row.count > 0.0)) nonpositive.add(key);
      if (!(row.moe >= 0.0)) {
        bad_moe.add(key);
        continue;
      }
      const auto p = period_index.at(row.period_end_year);
      const auto r = race_index.at(row.race);
      if (data.has_acs(county->second, p, r)) duplicate.add(key);
      data.n_acs(county->second, p, r) = row.count;
      data.s_acs(county->second, p, r) = moe_to_se(row.moe, key);
      data.has_acs(county->second, p, r) = 1;
    }
    unknown.raise_if_any();
    duplicate.raise_if_any();
    nonpositive.raise_if_any();
    bad_moe.raise_if_any();
  }

  // Every ACS (county, race) must also be present in PEP.
  {
    Problems no_pep("ACS county-race cells without any PEP counts");
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t r = 0; r < R; ++r) {
        bool any_acs = false;
        bool any_pep = false;
        for (std::size_t p = 0; p < P; ++p) any_acs = any_acs || data.has_acs(c, p, r);
        for (std::size_t t = 0; t < T; ++t) any_pep = any_pep || data.has_pep(c, t, r);
        if (any_acs && !any_pep) no_pep.add("(" + data.counties[c] + ", " + data.races[r] + ")");
      }
    }
    no_pep.raise_if_any();
  }

  // PEP period weights. Years without a PEP count take the count of the nearest
  // available year (earliest year carried backward, latest carried forward).
  data.pep_weights = Grid3<std::array<double, kPeriodLength>>(C, P, R, {});
  data.pep_weight_source = Grid3<WeightSource>(C, P, R, WeightSource::uniform);
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t r = 0; r < R; ++r) {
      std::vector<std::size_t> available;
      for (std::size_t t = 0; t < T; ++t) {
        if (data.has_pep(c, t, r)) available.push_back(t);
      }
      for (std::size_t p = 0; p < P; ++p) {
        if (available.empty()) {
          data.pep_weights(c, p, r).fill(1.0 / kPeriodLength);
          data.pep_weight_source(c, p, r) = WeightSource::uniform;
          continue;
        }
        std::array<double, kPeriodLength> counts{};
        bool carried = false;
        const auto first = data.period_start(p);
        for (std::size_t k = 0; k < kPeriodLength; ++k) {
          const auto t = first + k;
          if (data.has_pep(c, t, r)) {
            counts[k] = data.n_pep(c, t, r);
            continue;
          }
          carried = true;
          std::size_t nearest = available.front();
          for (auto a : available) {
            const auto gap = a > t ? a - t : t - a;
            const auto best = nearest > t ? nearest - t : t - nearest;
            if (gap < best) nearest = a;
          }
          counts[k] = data.n_pep(c, nearest, r);
        }
        data.pep_weights(c, p, r) = pep_period_weights(
            std::span<const double, kPeriodLength>(counts),
            cell_key(data.counties[c], data.races[r], data.acs_end_years[p]));
        data.pep_weight_source(c, p, r) = carried ? WeightSource::carried : WeightSource::observed;
      }
    }
  }

  // Tract-level ACS counts.
  {
    Problems unknown("tract rows for counties without census counts");
    Problems negative("tract counts must be nonnegative");
    Problems duplicate("duplicate tract keys");
    std::set<std::tuple<std::size_t, std::string, std::size_t, int>> seen;
    for (const auto& row : tables.tract_acs_rows) {
      if (!modeled(row.race)) continue;
      const auto key = with_origin("(" + row.county_id + ", " + row.tract_id + ", " + row.race + ", " +
                                       std::to_string(row.period_end_year) + ")",
                                   row.origin);
      const auto county = county_index.find(row.county_id);
      if (county == county_index.end()) {
        unknown.add(key);
        continue;
      }
      if (!(row.count >= 0.0)) negative.add(key);
      const auto r = race_index.at(row.race);
      if (!seen.emplace(county->second, row.tract_id, r, row.period_end_year).second) duplicate.add(key);
      data.tracts.push_back({county->second, row.tract_id, r, row.period_end_year, row.count});
    }
    unknown.raise_if_any();
    negative.raise_if_any();
    duplicate.raise_if_any();
  }
  return data;
}

PopulationDataset without_sources(PopulationDataset data, bool census, bool pep, bool acs) {
  if (census) std::ranges::fill(data.has_census.flat(), std::uint8_t{0});
  if (pep) {
    std::ranges::fill(data.has_pep.flat(), std::uint8_t{0});
    std::ranges::fill(data.has_d.flat(), std::uint8_t{0});
  }
  if (acs) std::ranges::fill(data.has_acs.flat(), std::uint8_t{0});
  return data;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

template <typename T>
json grid_to_json(const Grid2<T>& g) {
  return json{{"dims", {g.rows(), g.cols()}}, {"data", std::vector<T>(g.flat().begin(), g.flat().end())}};
}

template <typename T>
json grid_to_json(const Grid3<T>& g) {
  return json{{"dims", {g.dim0(), g.dim1(), g.dim2()}},
              {"data", std::vector<T>(g.flat().begin(), g.flat().end())}};
}

template <typename T>
Grid2<T> grid2_from_json(const json& j) {
  Grid2<T> g(j.at("dims").at(0).get<std::size_t>(), j.at("dims").at(1).get<std::size_t>());
  const auto values = j.at("data").get<std::vector<T>>();
  if (values.size() != g.size()) throw std::invalid_argument("dataset file: grid size mismatch");
  std::ranges::copy(values, g.flat().begin());
  return g;
}

template <typename T>
Grid3<T> grid3_from_json(const json& j) {
  Grid3<T> g(j.at("dims").at(0).get<std::size_t>(), j.at("dims").at(1).get<std::size_t>(),
             j.at("dims").at(2).get<std::size_t>());
  const auto values = j.at("data").get<std::vector<T>>();
  if (values.size() != g.size()) throw std::invalid_argument("dataset file: grid size mismatch");
  std::ranges::copy(values, g.flat().begin());
  return g;
}

}  // namespace

void save_dataset(const PopulationDataset& data, const std::filesystem::path& path) {
  json tracts = json::array();
  for (const auto& t : data.tracts) {
    tracts.push_back({t.county, t.tract_id, t.race, t.period_end_year, t.count});
  }
  Grid3<double> weights(data.pep_weights.dim0(), data.pep_weights.dim1(),
                        data.pep_weights.dim2() * kPeriodLength);
  Grid3<std::uint8_t> weight_source(data.pep_weight_source.dim0(), data.pep_weight_source.dim1(),
                                    data.pep_weight_source.dim2());
  for (std::size_t i = 0; i < data.pep_weights.size(); ++i) {
    for (std::size_t k = 0; k < kPeriodLength; ++k) {
      weights.flat()[i * kPeriodLength + k] = data.pep_weights.flat()[i][k];
    }
    weight_source.flat()[i] = static_cast<std::uint8_t>(data.pep_weight_source.flat()[i]);
  }
  const json j{{"format", "bpop-dataset-1"},
               {"counties", data.counties},
               {"races", data.races},
               {"years", data.years},
               {"t_ref", data.t_ref},
               {"acs_end_years", data.acs_end_years},
               {"pep_last", data.pep_last},
               {"n_census", grid_to_json(data.n_census)},
               {"has_census", grid_to_json(data.has_census)},
               {"n_pep", grid_to_json(data.n_pep)},
               {"has_pep", grid_to_json(data.has_pep)},
               {"d", grid_to_json(data.d)},
               {"has_d", grid_to_json(data.has_d)},
               {"n_acs", grid_to_json(data.n_acs)},
               {"s_acs", grid_to_json(data.s_acs)},
               {"has_acs", grid_to_json(data.has_acs)},
               {"pep_weights", grid_to_json(weights)},
               {"pep_weight_source", grid_to_json(weight_source)},
               {"tracts", tracts}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump() << '\n';
}

PopulationDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const auto j = json::parse(in);
  if (j.at("format") != "bpop-dataset-1") throw std::invalid_argument(path.string() + ": unknown format");
  PopulationDataset data;
  data.counties = j.at("counties").get<std::vector<std::string>>();
  data.races = j.at("races").get<std::vector<std::string>>();
  data.years = j.at("years").get<std::vector<int>>();
  data.t_ref = j.at("t_ref").get<std::size_t>();
  data.acs_end_years = j.at("acs_end_years").get<std::vector<int>>();
  data.pep_last = j.at("pep_last").get<std::size_t>();
  data.n_census = grid2_from_json<double>(j.at("n_census"));
  data.has_census = grid2_from_json<std::uint8_t>(j.at("has_census"));
  data.n_pep = grid3_from_json<double>(j.at("n_pep"));
  data.has_pep = grid3_from_json<std::uint8_t>(j.at("has_pep"));
  data.d = grid3_from_json<double>(j.at("d"));
  data.has_d = grid3_from_json<std::uint8_t>(j.at("has_d"));
  data.n_acs = grid3_from_json<double>(j.at("n_acs"));
  data.s_acs = grid3_from_json<double>(j.at("s_acs"));
  data.has_acs = grid3_from_json<std::uint8_t>(j.at("has_acs"));
  const auto weights = grid3_from_json<double>(j.at("pep_weights"));
  const auto weight_source = grid3_from_json<std::uint8_t>(j.at("pep_weight_source"));
  data.pep_weights = Grid3<std::array<double, kPeriodLength>>(weight_source.dim0(), weight_source.dim1(),
                                                              weight_source.dim2());
  data.pep_weight_source = Grid3<WeightSource>(weight_source.dim0(), weight_source.dim1(), weight_source.dim2());
  for (std::size_t i = 0; i < data.pep_weights.size(); ++i) {
    for (std::size_t k = 0; k < kPeriodLength; ++k) {
      data.pep_weights.flat()[i][k] = weights.flat()[i * kPeriodLength + k];
    }
    data.pep_weight_source.flat()[i] = static_cast<WeightSource>(weight_source.flat()[i]);
  }
  for (const auto& t : j.at("tracts")) {
    data.tracts.push_back({t.at(0).get<std::size_t>(), t.at(1).get<std::string>(), t.at(2).get<std::size_t>(),
                           t.at(3).get<int>(), t.at(4).get<double>()});
  }
  return data;
}

}  // namespace bpop
