// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "ebm/energy_model.hpp"
#include "ebm/rng.hpp"

namespace ebm {

struct Gaussian2D {
  double mean[2] = {0, 0};
  double cov[2][2] = {{1, 0}, {0, 1}};
};

// U(x) = log sum_k w_k N(x; mu_k, Sigma_k), a normalized density.
class GaussianMixture2D : public ContinuousEnergyModel {
 public:
  GaussianMixture2D(std::vector<double> weights, std::vector<Gaussian2D> components);
  std::size_t dim() const override { return 2; }
  double potential(std::span<const double> x) const override;
  void grad_x(std::span<const double> x, std::span<double> out) const override;
  std::vector<double> sample(Rng& rng) const;
  std::vector<double> component_posterior(std::span<const double> x) const;

 private:
  struct Prepared {
    double mean[2];
    double prec[2][2];
    double log_norm;
    double chol[2][2];
  };
  std::vector<double> log_w_;
  std::vector<Prepared> comps_;
};

// U(x) = w'x + 1/2 x'Ax with A symmetric. A negative definite A gives
// N(-A^{-1} w, -A^{-1}). Blocks: "linear" (d), "quadratic" (upper triangle).
class QuadraticEnergy : public ContinuousEnergyModel {
 public:
  explicit QuadraticEnergy(std::size_t dim);
  std::size_t dim() const override { return d_; }
  double potential(std::span<const double> x) const override;
  void grad_x(std::span<const double> x, std::span<double> out) const override;
  void add_potential_grad(std::span<const double> x, double scale,
                          std::span<double> grad) const override;

  double a(std::size_t i, std::size_t j) const;
  // Sets A = -precision, w = precision * mean.
  void set_gaussian(std::span<const double> mean, const std::vector<std::vector<double>>& cov);
  // Covariance -A^{-1}.
  std::vector<std::vector<double>> covariance() const;
  std::vector<double> mean() const;

 private:
  std::size_t tri(std::size_t i, std::size_t j) const;
  std::size_t d_;
};

}  // namespace ebm
