#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bpop/config.hpp"
#include "bpop/ingest.hpp"
#include "bpop/process_model.hpp"
#include "bpop/target.hpp"

namespace bpop {

/// Parameter kinds in the order the sampler sweeps them.
enum class ParamKind : std::uint8_t {
  eta_ctr,
  eta_cr,
  eta_c,
  eta_global,
  sigma_ref,
  sigma_eta,
  phi,
  omega,
  sigma_ns_cr,
  sigma_ns_c,
  delta_ctr,
  delta_cr,
  delta_c,
  chi_c,
  rho,
};

struct ParamSite {
  ParamKind kind;
  std::uint32_t c{0};
  std::uint32_t t{0};  // year index for eta_ctr, delta index for delta_ctr
  std::uint32_t r{0};
};

/// Parameter sites of the full model in registry (sweep) order.
std::vector<ParamSite> parameter_sites(const PopulationDataset& data);
std::string parameter_name(const PopulationDataset& data, const ParamSite& site);
std::vector<std::string> parameter_registry(const PopulationDataset& data);

/// The B-Pop posterior as a sampler target. Local densities only touch the terms that
/// involve the updated parameter; ACS Cholesky factors and weighted means are cached per
/// (county, race) block.
class BpopTarget : public Target {
 public:
  BpopTarget(std::shared_ptr<const PopulationDataset> data, ModelConfig config, LatentState init);

  std::size_t dim() const override { return sites_.size(); }
  const ParamInfo& info(std::size_t i) const override { return infos_[i]; }
  double value(std::size_t i) const override;
  double current_local(std::size_t i) override;
  double proposed_local(std::size_t i, double v) override;
  void accept(std::size_t i, double v) override;
  double log_density() override;

  /// Kink moves: for a pivot year k, add b * (t - k) to every later year of one series
  /// (forward of the decennial year) or b * (k - t) to every earlier year (backward).
  /// Each changes exactly one RW2 residual, so trends in weakly observed years can move
  /// without fighting the smoothing prior one year at a time.
  std::size_t num_moves() const override { return moves_.size(); }
  double move_initial_scale(std::size_t) const override { return 0.005; }
  double move_current_local(std::size_t m) override { return move_local(m, false); }
  double move_proposed_local(std::size_t m, double b) override;
  void move_accept(std::size_t m, double b) override;

  const LatentState& state() const noexcept { return state_; }
  const ParamSite& site(std::size_t i) const noexcept { return sites_[i]; }

 private:
  struct AcsBlock {
    bool active{false};
    std::vector<Eigen::Index> keep;
    Eigen::MatrixXd chol;
    double log_det{0.0};
    Eigen::VectorXd tildegamma;  // all periods
    double loglik{0.0};
  };

  struct KinkMove {
    std::uint32_t c;
    std::uint32_t r;
    std::uint32_t k;
    bool forward;
  };

  double& slot(std::size_t i);
  double move_local(std::size_t m, bool store);
  void shift_series(const KinkMove& move, double b);
  void recompute_tildegamma(std::size_t c, std::size_t r, Eigen::VectorXd& out) const;
  double local(std::size_t i, bool store);
  double rw2_touching(std::size_t c, std::size_t t, std::size_t r) const;
  double rw2_term(std::size_t c, std::size_t j, std::size_t r) const;
  double census_term(std::size_t c, std::size_t r) const;
  double pep_terms(std::size_t c, std::size_t r, std::size_t from) const;
  bool factor_block(std::size_t c, std::size_t r, double sigma_ns, double rho, Eigen::MatrixXd& chol,
                    double& log_det) const;
  double block_loglik(const AcsBlock& block, const Eigen::MatrixXd& chol, double log_det,
                      const Eigen::VectorXd& tildegamma, std::size_t c, std::size_t r) const;
  void refresh_block(std::size_t c, std::size_t r);

  std::shared_ptr<const PopulationDataset> data_;
  ModelConfig config_;
  LatentState state_;
  std::optional<std::size_t> ref_period_;
  std::vector<ParamSite> sites_;
  std::vector<ParamInfo> infos_;
  Grid3<double> gamma_;
  std::vector<AcsBlock> blocks_;  // c * R + r
  /// For each year index, the (period, offset) pairs of ACS periods covering it.
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> periods_of_year_;

  std::vector<KinkMove> moves_;
  std::vector<double> saved_eta_;

  // State computed by the last proposed_local call, reused on accept.
  std::size_t scratch_site_{static_cast<std::size_t>(-1)};
  double scratch_value_{0.0};
  Eigen::VectorXd scratch_tg_;
  std::vector<Eigen::MatrixXd> scratch_chol_;
  std::vector<double> scratch_log_det_;
  std::vector<double> scratch_loglik_;
  std::size_t scratch_move_{static_cast<std::size_t>(-1)};
  double scratch_move_value_{0.0};
};

}  // namespace bpop
