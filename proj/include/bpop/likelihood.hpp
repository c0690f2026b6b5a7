#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "bpop/config.hpp"
#include "bpop/ingest.hpp"
#include "bpop/process_model.hpp"

namespace bpop {

double decennial_loglik(double n_census, double gamma_ref, double chi, double sigma_ns);
double pep_loglik(double n_pep, double gamma, double var_pep);
double deviation_loglik(double d, double delta);
double acs_weighted_mean(std::span<const double> gammas, std::span<const double> weights);

/// Diagonal sigma_ns^2 + s_p^2 (sigma_ns^2 alone for reference_period), off-diagonal
/// rho * sigma_p * sigma_q. jitter is added to the diagonal.
Eigen::MatrixXd build_acs_covariance(double sigma_ns, std::span<const double> s, double rho,
                                     std::optional<std::size_t> reference_period = std::nullopt,
                                     double jitter = 0.0);

/// Raised when a covariance matrix fails to factor. Carries the smallest pivot seen.
class NotPositiveDefinite : public std::domain_error {
 public:
  NotPositiveDefinite(const std::string& what, double smallest_pivot, std::size_t index)
      : std::domain_error(what), smallest_pivot_{smallest_pivot}, index_{index} {}
  double smallest_pivot() const noexcept { return smallest_pivot_; }
  std::size_t index() const noexcept { return index_; }

 private:
  double smallest_pivot_;
  std::size_t index_;
};

/// In-place lower Cholesky factor of the symmetric matrix a (lower triangle is read).
/// On success returns true and sets log_det; on failure returns false and reports the
/// offending pivot and its index. The strict upper triangle is zeroed.
bool cholesky_lower(Eigen::MatrixXd& a, double& log_det, double& bad_pivot, std::size_t& bad_index) noexcept;

/// Multivariate normal log-density. mask (optional) selects the available entries;
/// the rest are marginalized out. Throws NotPositiveDefinite.
double acs_loglik(std::span<const double> n_acs, std::span<const double> tildegamma, const Eigen::MatrixXd& sigma,
                  std::span<const std::uint8_t> mask = {});

/// Index of the ACS period flagged as carrying non-sampling error only, if configured.
std::optional<std::size_t> acs_reference_period(const PopulationDataset& data, const ModelConfig& config);

/// Per-source decomposition of the joint log-density.
struct JointTerms {
  double decennial{0.0};
  double pep{0.0};
  double deviation{0.0};
  double acs{0.0};
  double process{0.0};
  double hierarchy{0.0};
  double process_hyper{0.0};
  double error_hyper{0.0};

  double total() const noexcept {
    return decennial + pep + deviation + acs + process + hierarchy + process_hyper + error_hyper;
  }
};

/// Throws std::domain_error naming the parameter if any value is NaN.
JointTerms joint_terms(const LatentState& state, const PopulationDataset& data, const ModelConfig& config);
double joint_loglik(const LatentState& state, const PopulationDataset& data, const ModelConfig& config);

}  // namespace bpop
