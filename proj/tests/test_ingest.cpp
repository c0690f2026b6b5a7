#include <cmath>
#include <random>

#include "bpop/ingest.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace bpop;

TEST_CASE("moe_to_se examples") {
  CHECK(moe_to_se(164.5) == doctest::Approx(100.0).epsilon(1e-15));
  CHECK(moe_to_se(0.0) == 0.0);
  CHECK(moe_to_se(1.645) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(moe_to_se(164.5) == 164.5 / 1.645);
}

TEST_CASE("moe_to_se rejects negative input and names the location") {
  try {
    moe_to_se(-1.0, "acs.csv:7");
    FAIL("expected an error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("acs.csv:7") != std::string::npos);
  }
}

TEST_CASE("moe_to_se is linear") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1000.0);
  for (int i = 0; i < 200; ++i) {
    const double a = u(rng) / 100.0;
    const double m = u(rng);
    CHECK(moe_to_se(a * m) == doctest::Approx(a * moe_to_se(m)).epsilon(1e-13));
  }
}

TEST_CASE("pep_period_weights examples") {
  auto check = [](std::array<double, 5> counts, std::array<double, 5> expected) {
    const auto w = pep_period_weights(std::span<const double, 5>(counts));
    for (int k = 0; k < 5; ++k) CHECK(w[k] == doctest::Approx(expected[k]).epsilon(1e-15));
  };
  check({100, 100, 100, 100, 100}, {0.2, 0.2, 0.2, 0.2, 0.2});
  check({100, 200, 300, 200, 200}, {100.0 / 1000, 200.0 / 1000, 300.0 / 1000, 200.0 / 1000, 200.0 / 1000});
  check({1, 1, 1, 1, 6}, {0.1, 0.1, 0.1, 0.1, 0.6});
}

TEST_CASE("pep_period_weights rejects nonpositive counts with context") {
  std::array<double, 5> counts{100, 0, 100, 100, 100};
  try {
    pep_period_weights(std::span<const double, 5>(counts), "(13001, black, 2012)");
    FAIL("expected an error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("(13001, black, 2012)") != std::string::npos);
  }
}

TEST_CASE("pep_annual_deviation examples") {
  {
    std::vector<int> years{2010, 2011, 2012};
    std::vector<double> counts{100, 110, 105};
    CHECK(pep_annual_deviation(years, counts) == std::vector<double>{10, -5});
  }
  {
    std::vector<int> years{2010, 2011};
    std::vector<double> counts{50, 50};
    CHECK(pep_annual_deviation(years, counts) == std::vector<double>{0});
  }
  {
    std::vector<int> years{2010, 2012};
    std::vector<double> counts{50, 50};
    CHECK_THROWS_AS(pep_annual_deviation(years, counts), std::invalid_argument);
  }
  {
    std::vector<int> years{2010};
    std::vector<double> counts{50};
    CHECK_THROWS_AS(pep_annual_deviation(years, counts), std::invalid_argument);
  }
}

TEST_CASE("a single growth year shows as a positive deviation spike") {
  auto tables = fixtures::ga_tables();
  for (auto& row : tables.pep_rows) {
    if (row.county_id != "13001" || row.race != "white") continue;
    row.count = row.year >= 2014 ? 1200.0 : 1000.0;
  }
  const auto data = build_dataset(tables, ModelConfig{});
  const std::size_t c = 0;
  const std::size_t r = 1;
  for (int y = 2011; y <= 2019; ++y) {
    const auto t = data.year_index(y);
    REQUIRE(data.has_d(c, t, r));
    CHECK(data.d(c, t, r) == (y == 2014 ? 200.0 : 0.0));
  }
}

TEST_CASE("build_dataset on the two-county fixture") {
  const auto data = build_dataset(fixtures::ga_tables(), ModelConfig{});
  CHECK(data.num_counties() == 2);
  CHECK(data.num_races() == 2);
  CHECK(data.num_years() == 17);
  CHECK(data.years.front() == 2005);
  CHECK(data.years.back() == 2021);
  CHECK(data.years[data.t_ref] == 2010);
  CHECK(data.t_ref == 5);
  CHECK(data.acs_end_years.front() == 2009);
  CHECK(data.acs_end_years.back() == 2018);
  CHECK(data.period_start(0) == 0);
  CHECK(data.years[data.period_start(0) + 4] == 2009);
  CHECK(data.years[data.pep_last] == 2019);
  CHECK(data.tracts.size() == 2 * 2 * 2 * 10);

  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t r = 0; r < 2; ++r) {
      CHECK(data.has_census(c, r));
      for (std::size_t p = 0; p < data.num_periods(); ++p) {
        double sum = 0.0;
        for (double w : data.pep_weights(c, p, r)) {
          CHECK(w > 0.0);
          CHECK(w < 1.0);
          sum += w;
        }
        CHECK(std::abs(sum - 1.0) <= 1e-12);
        CHECK(data.s_acs(c, p, r) >= 0.0);
        const auto expected = data.acs_end_years[p] < 2014 ? WeightSource::carried : WeightSource::observed;
        CHECK(data.pep_weight_source(c, p, r) == expected);
      }
      for (std::size_t t = 1; t < data.num_years(); ++t) {
        if (data.has_pep(c, t, r) && data.has_pep(c, t - 1, r)) {
          REQUIRE(data.has_d(c, t, r));
          CHECK(data.d(c, t, r) == data.n_pep(c, t, r) - data.n_pep(c, t - 1, r));
        }
      }
    }
  }
}

TEST_CASE("pre-decennial periods carry the earliest PEP count backward") {
  const auto data = build_dataset(fixtures::ga_tables(), ModelConfig{});
  // Period 2005-2009 has no PEP at all: every year takes the 2010 count, so weights are uniform.
  for (double w : data.pep_weights(0, 0, 0)) CHECK(w == doctest::Approx(0.2).epsilon(1e-15));
  // Period 2008-2012: 2008 and 2009 take the 2010 count.
  const auto p = 3;
  REQUIRE(data.acs_end_years[p] == 2012);
  const double n10 = data.n_pep(0, data.year_index(2010), 0);
  const double n11 = data.n_pep(0, data.year_index(2011), 0);
  const double n12 = data.n_pep(0, data.year_index(2012), 0);
  const double total = 3 * n10 + n11 + n12;
  const auto& w = data.pep_weights(0, p, 0);
  CHECK(w[0] == doctest::Approx(n10 / total).epsilon(1e-14));
  CHECK(w[2] == doctest::Approx(n10 / total).epsilon(1e-14));
  CHECK(w[4] == doctest::Approx(n12 / total).epsilon(1e-14));
}

TEST_CASE("an ACS period ending 2009 covers 2005-2009") {
  auto tables = fixtures::ga_tables();
  const auto data = build_dataset(tables, ModelConfig{});
  const auto p = 0u;
  CHECK(data.acs_end_years[p] == 2009);
  CHECK(data.years[data.period_start(p)] == 2005);
  CHECK(data.has_acs(0, p, 0));
  CHECK(data.n_acs(0, p, 0) == 1000.0);
  CHECK(data.s_acs(0, p, 0) == doctest::Approx(std::sqrt(1000.0)).epsilon(1e-14));
}

TEST_CASE("build_dataset errors") {
  SUBCASE("empty PEP table") {
    auto tables = fixtures::ga_tables();
    tables.pep_rows.clear();
    CHECK_THROWS_AS(build_dataset(tables, ModelConfig{}), IngestError);
  }
  SUBCASE("duplicate keys are all listed") {
    auto tables = fixtures::ga_tables();
    tables.pep_rows.push_back(tables.pep_rows[0]);
    tables.pep_rows.push_back(tables.pep_rows[3]);
    try {
      build_dataset(tables, ModelConfig{});
      FAIL("expected an error");
    } catch (const IngestError& e) {
      CHECK(e.offending_keys().size() == 2);
      CHECK(std::string(e.what()).find("(13001, black, 2010)") != std::string::npos);
      CHECK(std::string(e.what()).find("(13001, black, 2013)") != std::string::npos);
    }
  }
  SUBCASE("census outside the reference year") {
    auto tables = fixtures::ga_tables();
    tables.census_rows.push_back({"13001", "black", 2000, 900.0, "census.csv:9"});
    try {
      build_dataset(tables, ModelConfig{});
      FAIL("expected an error");
    } catch (const IngestError& e) {
      REQUIRE(e.offending_keys().size() == 1);
      CHECK(e.offending_keys()[0].find("census.csv:9") != std::string::npos);
    }
  }
  SUBCASE("zero count for a modeled race") {
    auto tables = fixtures::ga_tables();
    tables.census_rows[1].count = 0.0;
    CHECK_THROWS_AS(build_dataset(tables, ModelConfig{}), IngestError);
  }
  SUBCASE("ACS cell without PEP") {
    auto tables = fixtures::ga_tables();
    std::erase_if(tables.pep_rows, [](const CountRow& row) { return row.county_id == "13003" && row.race == "white"; });
    CHECK_THROWS_AS(build_dataset(tables, ModelConfig{}), IngestError);
  }
  SUBCASE("ACS row for an unknown county") {
    auto tables = fixtures::ga_tables();
    tables.acs_rows.push_back({"99999", "black", 2012, 10.0, 1.0, ""});
    CHECK_THROWS_AS(build_dataset(tables, ModelConfig{}), IngestError);
  }
  SUBCASE("negative MOE") {
    auto tables = fixtures::ga_tables();
    tables.acs_rows[2].moe = -1.0;
    CHECK_THROWS_AS(build_dataset(tables, ModelConfig{}), IngestError);
  }
  SUBCASE("reference year outside the range") {
    ModelConfig config;
    config.tref_year = 2030;
    CHECK_THROWS_AS(build_dataset(fixtures::ga_tables(), config), std::invalid_argument);
  }
}

TEST_CASE("race selection keeps only the listed races") {
  ModelConfig config;
  config.races = {"white"};
  const auto data = build_dataset(fixtures::ga_tables(), config);
  CHECK(data.races == std::vector<std::string>{"white"});
  CHECK(data.n_census(1, 0) == 5000.0);
}

TEST_CASE("dataset serialization round-trips bit-exactly") {
  auto tables = fixtures::ga_tables();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& row : tables.pep_rows) row.count += u(rng);
  for (auto& row : tables.acs_rows) row.moe *= 1.0 + u(rng) / 3.0;
  const auto data = build_dataset(tables, ModelConfig{});
  const auto dir = fixtures::temp_dir("dataset_roundtrip");
  save_dataset(data, dir / "dataset.json");
  const auto back = load_dataset(dir / "dataset.json");
  CHECK(back == data);
}

TEST_CASE("source tables round-trip through CSV") {
  auto tables = fixtures::ga_tables();
  tables.pep_rows[4].count = 1234.5678901234567;
  const auto dir = fixtures::temp_dir("tables_roundtrip");
  write_source_tables(tables, dir);
  const auto back = read_source_tables(dir);
  REQUIRE(back.pep_rows.size() == tables.pep_rows.size());
  CHECK(back.pep_rows[4].count == tables.pep_rows[4].count);
  CHECK(back.pep_rows[4].origin.find("pep.csv:6") != std::string::npos);
  CHECK(build_dataset(back, ModelConfig{}) == build_dataset(tables, ModelConfig{}));
}

TEST_CASE("without_sources masks whole sources") {
  const auto data = build_dataset(fixtures::ga_tables(), ModelConfig{});
  const auto masked = without_sources(data, true, true, true);
  for (auto v : masked.has_census.flat()) CHECK(v == 0);
  for (auto v : masked.has_pep.flat()) CHECK(v == 0);
  for (auto v : masked.has_d.flat()) CHECK(v == 0);
  for (auto v : masked.has_acs.flat()) CHECK(v == 0);
  CHECK(masked.pep_weights == data.pep_weights);
}
