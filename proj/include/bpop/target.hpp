#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "bpop/distributions.hpp"

namespace bpop {

enum class Transform {
  identity,  // unbounded
  lower_log,  // [lower, inf): u = log(x - lower)
  logit,      // [lower, upper]: u = logit((x - lower) / (upper - lower))
};

struct ParamInfo {
  std::string name;
  double lower{-kInf};
  double upper{kInf};
  double initial_scale{0.1};  // random-walk sd on the unconstrained scale

  Transform transform() const noexcept;
};

double to_unconstrained(const ParamInfo& info, double x) noexcept;
double from_unconstrained(const ParamInfo& info, double u) noexcept;
/// log |dx/du| at u.
double log_jacobian(const ParamInfo& info, double u) noexcept;

/// A density over scalar parameters that the sampler updates one site at a time.
/// current_local(i) and proposed_local(i, v) must differ from the joint log-density by
/// the same constant (the terms not involving parameter i); accept(i, v) commits v and
/// may reuse state computed by the most recent proposed_local(i, v).
class Target {
 public:
  virtual ~Target() = default;
  virtual std::size_t dim() const = 0;
  virtual const ParamInfo& info(std::size_t i) const = 0;
  virtual double value(std::size_t i) const = 0;
  virtual double current_local(std::size_t i) = 0;
  virtual double proposed_local(std::size_t i, double v) = 0;
  virtual void accept(std::size_t i, double v) = 0;
  /// Full log-density at the current state (up to a constant shared by all states).
  virtual double log_density() = 0;

  /// Optional block moves run after each single-site sweep. Move m shifts the state by
  /// b times a fixed direction; the sampler proposes b ~ N(0, scale^2) from b = 0, so the
  /// proposal is symmetric and needs no Jacobian.
  virtual std::size_t num_moves() const { return 0; }
  virtual double move_initial_scale(std::size_t) const { return 0.1; }
  virtual double move_current_local(std::size_t) { return 0.0; }
  virtual double move_proposed_local(std::size_t, double) { return 0.0; }
  virtual void move_accept(std::size_t, double) {}
};

/// Builds the initial target for a chain, drawing any random initialization from rng.
using TargetFactory = std::function<std::unique_ptr<Target>(std::mt19937_64& rng)>;

/// Target defined by a joint log-density over a plain vector; every local evaluation
/// recomputes the full density. Suitable for small test problems.
class DenseTarget : public Target {
 public:
  using LogDensity = std::function<double(const std::vector<double>&)>;
  DenseTarget(std::vector<ParamInfo> params, std::vector<double> start, LogDensity log_density);

  std::size_t dim() const override { return params_.size(); }
  const ParamInfo& info(std::size_t i) const override { return params_[i]; }
  double value(std::size_t i) const override { return x_[i]; }
  double current_local(std::size_t i) override;
  double proposed_local(std::size_t i, double v) override;
  void accept(std::size_t i, double v) override { x_[i] = v; }
  double log_density() override { return f_(x_); }

 private:
  std::vector<ParamInfo> params_;
  std::vector<double> x_;
  LogDensity f_;
};

}  // namespace bpop
