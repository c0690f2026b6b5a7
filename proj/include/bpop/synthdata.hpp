#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bpop/config.hpp"
#include "bpop/grid.hpp"
#include "bpop/ingest.hpp"
#include "bpop/process_model.hpp"

namespace bpop {

enum class PepNoise {
  independent,  // each year drawn around the truth with the accumulated variance
  cumulative,   // errors accumulate as a random walk from the decennial year
};

struct SimConfig {
  std::size_t counties{20};
  std::size_t races{2};
  int start_year{2005};
  int end_year{2021};
  int tref_year{2010};
  int pep_first_year{2010};
  int pep_last_year{2019};
  int acs_first_end_year{2009};
  int acs_last_end_year{2018};

  double eta_global{9.14};
  double omega{0.77};
  double phi{0.86};
  double sigma_ref{0.015};
  double sigma_eta{0.017};
  double sigma_ns{20.0};
  double delta{10.0};
  double chi{0.91};
  double rho{0.5};
  /// ACS sampling sd = acs_se_constant * sqrt(weighted period mean).
  double acs_se_constant{1.0};
  PepNoise pep_noise{PepNoise::independent};
  std::size_t tracts_per_county{3};
  std::uint64_t seed{1};

  void validate() const;
};

struct SimTruth {
  std::vector<std::string> counties;
  std::vector<std::string> races;
  std::vector<int> years;
  std::size_t t_ref{0};
  LatentState state;
  Grid3<double> gamma;  // [c, t, r]
};

struct SimObservations {
  SourceTables tables;
  /// Keys of synthetic counts that were negative and clamped to 1.
  std::vector<std::string> clamped;
};

SimTruth simulate_truth(const SimConfig& sim, std::mt19937_64& rng);
SimObservations simulate_observations(const SimTruth& truth, const SimConfig& sim, std::mt19937_64& rng);

/// Model configuration matching the simulated year layout.
ModelConfig model_config_for(const SimConfig& sim);

/// truth.csv: county_id,race,year,gamma,eta
void write_truth(const SimTruth& truth, const std::filesystem::path& path);

/// Lower Cholesky factor that tolerates semi-definite input (zero pivots give zero columns).
Eigen::MatrixXd semidefinite_cholesky(const Eigen::MatrixXd& a);

}  // namespace bpop
