#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "bpop/likelihood.hpp"
#include "bpop/synthdata.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace bpop;

TEST_CASE("no process noise gives a constant series at exp(eta_cr)") {
  SimConfig sim;
  sim.counties = 3;
  sim.sigma_eta = 0.0;
  sim.sigma_ref = 0.0;
  std::mt19937_64 rng(1);
  const auto truth = simulate_truth(sim, rng);
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t r = 0; r < 2; ++r) {
      for (std::size_t t = 0; t < truth.years.size(); ++t) {
        CHECK(truth.gamma(c, t, r) == doctest::Approx(std::exp(truth.state.eta_cr(c, r))).epsilon(1e-14));
      }
    }
  }
}

TEST_CASE("fixed seed gives identical truth and observations") {
  SimConfig sim;
  sim.counties = 4;
  std::mt19937_64 a(9);
  std::mt19937_64 b(9);
  const auto ta = simulate_truth(sim, a);
  const auto tb = simulate_truth(sim, b);
  CHECK(ta.gamma == tb.gamma);
  CHECK(ta.state == tb.state);
  const auto oa = simulate_observations(ta, sim, a);
  const auto ob = simulate_observations(tb, sim, b);
  CHECK(build_dataset(oa.tables, model_config_for(sim)) == build_dataset(ob.tables, model_config_for(sim)));
}

TEST_CASE("second differences of simulated eta have variance sigma_eta^2") {
  SimConfig sim;
  sim.counties = 200;
  sim.sigma_eta = 0.017;
  std::mt19937_64 rng(2);
  const auto truth = simulate_truth(sim, rng);
  const auto& eta = truth.state.eta_ctr;
  double sum = 0.0;
  double sum2 = 0.0;
  double n = 0.0;
  for (std::size_t c = 0; c < eta.dim0(); ++c) {
    for (std::size_t r = 0; r < eta.dim2(); ++r) {
      for (std::size_t t = 2; t < eta.dim1(); ++t) {
        const double d2 = eta(c, t, r) - 2 * eta(c, t - 1, r) + eta(c, t - 2, r);
        sum += d2;
        sum2 += d2 * d2;
        n += 1.0;
      }
    }
  }
  const double var = (sum2 - sum * sum / n) / (n - 1.0);
  CHECK(std::abs(var / (0.017 * 0.017) - 1.0) < 0.1);
}

TEST_CASE("noiseless observations equal the truth") {
  SimConfig sim;
  sim.counties = 2;
  sim.chi = 0.0;
  sim.sigma_ns = 0.0;
  sim.delta = 0.0;
  sim.acs_se_constant = 0.0;
  std::mt19937_64 rng(3);
  const auto truth = simulate_truth(sim, rng);
  const auto obs = simulate_observations(truth, sim, rng);
  CHECK(obs.clamped.empty());
  const auto data = build_dataset(obs.tables, model_config_for(sim));
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t r = 0; r < 2; ++r) {
      CHECK(data.n_census(c, r) == doctest::Approx(truth.gamma(c, truth.t_ref, r)).epsilon(1e-14));
      for (std::size_t t = 0; t < data.num_years(); ++t) {
        if (data.has_pep(c, t, r)) CHECK(data.n_pep(c, t, r) == doctest::Approx(truth.gamma(c, t, r)).epsilon(1e-14));
      }
      for (std::size_t p = 0; p < data.num_periods(); ++p) {
        const auto first = data.period_start(p);
        const auto& w = data.pep_weights(c, p, r);
        double tg = 0.0;
        for (std::size_t k = 0; k < 5; ++k) tg += w[k] * truth.gamma(c, first + k, r);
        CHECK(data.n_acs(c, p, r) == doctest::Approx(tg).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("census with one percent undercount and no noise is 0.99 of the truth") {
  SimConfig sim;
  sim.counties = 3;
  sim.chi = 1.0;
  sim.sigma_ns = 0.0;
  std::mt19937_64 rng(4);
  const auto truth = simulate_truth(sim, rng);
  const auto obs = simulate_observations(truth, sim, rng);
  for (const auto& row : obs.tables.census_rows) {
    const auto c = static_cast<std::size_t>(std::find(truth.counties.begin(), truth.counties.end(), row.county_id) - truth.counties.begin());
    const auto r = static_cast<std::size_t>(std::find(truth.races.begin(), truth.races.end(), row.race) - truth.races.begin());
    CHECK(row.count == doctest::Approx(0.99 * truth.gamma(c, truth.t_ref, r)).epsilon(1e-14));
  }
}

TEST_CASE("empirical covariance of ACS draws matches the model covariance") {
  SimConfig sim;
  sim.counties = 1;
  sim.races = 1;
  sim.rho = 0.5;
  sim.sigma_ns = 20.0;
  sim.tracts_per_county = 1;
  std::mt19937_64 rng(5);
  const auto truth = simulate_truth(sim, rng);
  const int reps = 4000;
  const std::size_t P = 10;
  std::vector<Eigen::VectorXd> samples;
  Eigen::VectorXd s(P);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(P);
  for (int i = 0; i < reps; ++i) {
    const auto obs = simulate_observations(truth, sim, rng);
    REQUIRE(obs.tables.acs_rows.size() == P);
    Eigen::VectorXd x(P);
    for (std::size_t p = 0; p < P; ++p) {
      x(p) = obs.tables.acs_rows[p].count;
      s(p) = obs.tables.acs_rows[p].moe / kMoeZ;
    }
    mean += x;
    samples.push_back(x);
  }
  mean /= reps;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(P, P);
  for (const auto& x : samples) cov += (x - mean) * (x - mean).transpose();
  cov /= reps - 1;
  std::vector<double> sv(s.data(), s.data() + P);
  const auto model = build_acs_covariance(truth.state.error.sigma_ns_cr(0, 0), sv, truth.state.error.rho);
  for (std::size_t i = 0; i < P; ++i) {
    for (std::size_t j = 0; j < P; ++j) {
      const double se = std::sqrt((model(i, i) * model(j, j) + model(i, j) * model(i, j)) / reps);
      CHECK(std::abs(cov(i, j) - model(i, j)) < 4.5 * se);
    }
  }
}

TEST_CASE("simulated deviations are first differences of simulated PEP") {
  SimConfig sim;
  sim.counties = 3;
  std::mt19937_64 rng(6);
  const auto truth = simulate_truth(sim, rng);
  const auto obs = simulate_observations(truth, sim, rng);
  const auto data = build_dataset(obs.tables, model_config_for(sim));
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t r = 0; r < 2; ++r) {
      for (int y = 2011; y <= 2019; ++y) {
        const auto t = data.year_index(y);
        CHECK(data.d(c, t, r) == data.n_pep(c, t, r) - data.n_pep(c, t - 1, r));
      }
    }
  }
}

TEST_CASE("tiny populations are clamped at one and flagged") {
  SimConfig sim;
  sim.counties = 5;
  sim.eta_global = 1.0;
  sim.omega = 0.1;
  sim.phi = 0.1;
  sim.sigma_ns = 20.0;
  std::mt19937_64 rng(7);
  const auto truth = simulate_truth(sim, rng);
  const auto obs = simulate_observations(truth, sim, rng);
  CHECK(!obs.clamped.empty());
  for (const auto& row : obs.tables.census_rows) CHECK(row.count >= 1.0);
  for (const auto& row : obs.tables.pep_rows) CHECK(row.count >= 1.0);
  for (const auto& row : obs.tables.acs_rows) CHECK(row.count >= 1.0);
  CHECK_NOTHROW(build_dataset(obs.tables, model_config_for(sim)));
}

TEST_CASE("semidefinite_cholesky reproduces rank-deficient matrices") {
  Eigen::MatrixXd a(3, 3);
  a << 4, 2, 0, 2, 1, 0, 0, 0, 9;
  const auto l = semidefinite_cholesky(a);
  CHECK((l * l.transpose() - a).norm() < 1e-12);
}

TEST_CASE("default simulation layout matches the desk-scale model") {
  const SimConfig sim;
  const auto config = model_config_for(sim);
  CHECK(config.start_year == 2005);
  CHECK(config.end_year == 2021);
  CHECK(config.tref_year == 2010);
  CHECK(sim.eta_global == 9.14);
  CHECK(sim.omega == 0.77);
  CHECK(sim.phi == 0.86);
  CHECK(sim.sigma_eta == 0.017);
}
