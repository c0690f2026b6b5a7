#include <cmath>
#include <memory>
#include <random>

#include "bpop/bpop_target.hpp"
#include "bpop/likelihood.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace bpop;

TEST_CASE("transforms round-trip and report the log Jacobian") {
  const std::vector<ParamInfo> infos{{"a", -kInf, kInf, 0.1}, {"b", 0.0, kInf, 0.1}, {"c", 2.0, kInf, 0.1},
                                     {"d", 0.0, 1.0, 0.1},     {"e", 1.0, 1000.0, 0.1}};
  CHECK(infos[0].transform() == Transform::identity);
  CHECK(infos[1].transform() == Transform::lower_log);
  CHECK(infos[3].transform() == Transform::logit);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z(0.0, 2.0);
  for (const auto& info : infos) {
    for (int i = 0; i < 100; ++i) {
      const double u = z(rng);
      const double x = from_unconstrained(info, u);
      CHECK(x >= info.lower);
      CHECK(x <= info.upper);
      CHECK(to_unconstrained(info, x) == doctest::Approx(u).epsilon(1e-9));
      const double h = 1e-6;
      const double numeric = std::log(std::abs(from_unconstrained(info, u + h) - from_unconstrained(info, u - h)) / (2 * h));
      CHECK(log_jacobian(info, u) == doctest::Approx(numeric).epsilon(1e-5));
    }
  }
}

namespace {

struct Fixture {
  std::shared_ptr<const PopulationDataset> data;
  ModelConfig config;
  std::unique_ptr<BpopTarget> target;
};

Fixture make_fixture(bool gaps, bool reference_period) {
  auto tables = fixtures::ga_tables();
  ModelConfig config;
  if (gaps) {
    // Missing ACS periods and PEP years exercise the marginalized and masked paths.
    std::erase_if(tables.acs_rows, [](const AcsRow& row) {
      return (row.county_id == "13003" && row.period_end_year % 3 == 0) || (row.race == "white" && row.period_end_year == 2012);
    });
    std::erase_if(tables.pep_rows, [](const CountRow& row) { return row.county_id == "13001" && row.year == 2015; });
  }
  if (reference_period) config.acs_reference_end_year = 2010;
  auto data = std::make_shared<const PopulationDataset>(build_dataset(tables, config));
  std::mt19937_64 rng(17);
  auto init = init_state(*data, rng, config);
  auto target = std::make_unique<BpopTarget>(data, config, std::move(init));
  return {data, config, std::move(target)};
}

double tolerance(double reference) { return 1e-7 + 1e-11 * std::abs(reference); }

}  // namespace

TEST_CASE("registry names and order") {
  auto fx = make_fixture(false, false);
  const auto names = parameter_registry(*fx.data);
  REQUIRE(names.size() == fx.target->dim());
  CHECK(names.front() == "eta_ctr[13001,2005,black]");
  CHECK(names[1] == "eta_ctr[13001,2005,white]");
  CHECK(names.back() == "rho");
  CHECK(std::find(names.begin(), names.end(), "eta_global") != names.end());
  CHECK(std::find(names.begin(), names.end(), "delta_ctr[13003,2019,white]") != names.end());
  CHECK(std::find(names.begin(), names.end(), "delta_ctr[13003,2020,white]") == names.end());
  CHECK(std::find(names.begin(), names.end(), "sigma_ns_cr[13001,black]") != names.end());
  for (std::size_t i = 0; i < names.size(); ++i) CHECK(fx.target->info(i).name == names[i]);
}

TEST_CASE("local density differences equal joint density differences") {
  for (bool gaps : {false, true}) {
    for (bool reference : {false, true}) {
      CAPTURE(gaps);
      CAPTURE(reference);
      auto fx = make_fixture(gaps, reference);
      auto& target = *fx.target;
      std::mt19937_64 rng(99);
      std::normal_distribution<double> z(0.0, 1.0);
      std::uniform_int_distribution<std::size_t> pick(0, target.dim() - 1);
      double joint = joint_loglik(target.state(), *fx.data, fx.config);
      CHECK(target.log_density() == doctest::Approx(joint).epsilon(1e-12));
      for (int step = 0; step < 1500; ++step) {
        const std::size_t i = step < static_cast<int>(target.dim()) ? static_cast<std::size_t>(step) : pick(rng);
        const auto& info = target.info(i);
        const double x = target.value(i);
        const double v = from_unconstrained(info, to_unconstrained(info, x) + 0.3 * info.initial_scale * z(rng));
        const double current = target.current_local(i);
        const double proposed = target.proposed_local(i, v);
        if (step % 3 == 0) {
          // Rejected proposal: nothing may change.
          CHECK(target.value(i) == x);
          CHECK(target.current_local(i) == doctest::Approx(current).epsilon(1e-12));
          continue;
        }
        target.accept(i, v);
        const double next = joint_loglik(target.state(), *fx.data, fx.config);
        CAPTURE(info.name);
        CHECK(std::abs((proposed - current) - (next - joint)) <= tolerance(joint));
        CHECK(target.value(i) == v);
        joint = next;
      }
      CHECK(std::abs(target.log_density() - joint) <= tolerance(joint));
    }
  }
}

TEST_CASE("block move differences equal joint density differences") {
  for (bool gaps : {false, true}) {
    auto fx = make_fixture(gaps, false);
    auto& target = *fx.target;
    REQUIRE(target.num_moves() > 0);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> z(0.0, 0.004);
    double joint = joint_loglik(target.state(), *fx.data, fx.config);
    for (std::size_t m = 0; m < target.num_moves(); ++m) {
      for (int rep = 0; rep < 2; ++rep) {
        const double b = z(rng);
        const auto before = target.state();
        const double current = target.move_current_local(m);
        const double proposed = target.move_proposed_local(m, b);
        CHECK(target.state() == before);
        target.move_accept(m, b);
        const double next = joint_loglik(target.state(), *fx.data, fx.config);
        CHECK(std::abs((proposed - current) - (next - joint)) <= tolerance(joint));
        joint = next;
      }
      // Interleave a single-site update so caches are exercised across both kinds.
      const std::size_t i = m % target.dim();
      const auto& info = target.info(i);
      const double v = from_unconstrained(info, to_unconstrained(info, target.value(i)) + 0.2 * info.initial_scale);
      const double current = target.current_local(i);
      const double proposed = target.proposed_local(i, v);
      target.accept(i, v);
      const double next = joint_loglik(target.state(), *fx.data, fx.config);
      CHECK(std::abs((proposed - current) - (next - joint)) <= tolerance(joint));
      joint = next;
    }
    CHECK(std::abs(target.log_density() - joint) <= tolerance(joint));
  }
}

TEST_CASE("a kink move changes one RW2 residual and leaves the anchors alone") {
  auto fx = make_fixture(false, false);
  auto& target = *fx.target;
  const auto before = target.state();
  const auto t_ref = fx.data->t_ref;
  for (std::size_t m = 0; m < target.num_moves(); ++m) {
    target.move_proposed_local(m, 0.01);
    target.move_accept(m, 0.01);
  }
  const auto& after = target.state();
  for (std::size_t c = 0; c < fx.data->num_counties(); ++c) {
    for (std::size_t r = 0; r < fx.data->num_races(); ++r) {
      CHECK(after.eta_ctr(c, t_ref, r) == before.eta_ctr(c, t_ref, r));
      CHECK(after.eta_ctr(c, t_ref - 1, r) == before.eta_ctr(c, t_ref - 1, r));
      CHECK(after.eta_ctr(c, t_ref + 1, r) != before.eta_ctr(c, t_ref + 1, r));
    }
  }
}

TEST_CASE("initialization with a non-finite density names the offending term") {
  auto tables = fixtures::tiny_tables();
  const auto config = fixtures::tiny_config();
  auto data = std::make_shared<const PopulationDataset>(build_dataset(tables, config));
  auto s = fixtures::tiny_state(*data);
  s.error.chi_c[0] = -1.0;
  CHECK_THROWS_WITH(BpopTarget(data, config, s), doctest::Contains("error_hyper"));
}
