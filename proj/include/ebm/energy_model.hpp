// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "ebm/param_vector.hpp"

namespace ebm {

// An unnormalized log-density exp(U_theta(x)) over integer configurations.
// Only U and its parameter gradient are exposed; nothing here can compute the
// normalizing constant, which keeps MCMC code honest.
//
// A model may carry a "zeta" block holding estimated log-normalizers (one per
// length for trans-dimensional models). U never reads it; log_model() does.
class EnergyModel {
 public:
  virtual ~EnergyModel() = default;

  virtual double potential(std::span<const int> x) const = 0;
  // grad += scale * dU/dtheta at x.
  virtual void add_potential_grad(std::span<const int> x, double scale,
                                  std::span<double> grad) const = 0;

  ParamVector& params() { return params_; }
  const ParamVector& params() const { return params_; }
  std::size_t num_params() const { return params_.size(); }

  // Adds `count` log-normalizer slots (call after all model blocks).
  void enable_zeta(std::size_t count, double init = 0.0);
  bool has_zeta() const { return zeta_offset_ != kNoZeta; }
  // Which zeta slot applies to x; models with one slot keep the default.
  virtual std::size_t zeta_slot(std::span<const int> x) const;
  double zeta(std::span<const int> x) const;

  // log p_{theta,zeta}(x) = U(x) - zeta(x); equals U(x) without a zeta block.
  double log_model(std::span<const int> x) const;
  void add_log_model_grad(std::span<const int> x, double scale, std::span<double> grad) const;

 protected:
  static constexpr std::size_t kNoZeta = static_cast<std::size_t>(-1);
  ParamVector params_;
  std::size_t zeta_offset_ = kNoZeta;
  std::size_t zeta_count_ = 0;
};

// An objective and its gradient with respect to the flat parameter vector.
struct ObjectiveValue {
  double value = 0.0;
  std::vector<double> gradient;
};

// exp(U(x)) over real vectors, with a gradient in x for Langevin moves.
class ContinuousEnergyModel {
 public:
  virtual ~ContinuousEnergyModel() = default;
  virtual std::size_t dim() const = 0;
  virtual double potential(std::span<const double> x) const = 0;
  virtual void grad_x(std::span<const double> x, std::span<double> out) const = 0;
  // grad += scale * dU/dtheta; models without parameters leave it untouched.
  virtual void add_potential_grad(std::span<const double> x, double scale,
                                  std::span<double> grad) const {
    (void)x, (void)scale, (void)grad;
  }
  ParamVector& params() { return params_; }
  const ParamVector& params() const { return params_; }

 protected:
  ParamVector params_;
};

}  // namespace ebm
