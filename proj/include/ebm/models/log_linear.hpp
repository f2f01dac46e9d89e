// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "ebm/energy_model.hpp"

namespace ebm {

// Sparse feature vector: (index, value) pairs; repeated indices add up.
using SparseFeatures = std::vector<std::pair<std::size_t, double>>;
using FeatureFn = std::function<void(std::span<const int>, SparseFeatures&)>;

// U(x) = lambda' f(x).
class LogLinearModel : public EnergyModel {
 public:
  LogLinearModel(std::size_t num_features, FeatureFn features);

  std::size_t num_features() const { return n_; }
  std::span<double> weights() { return params_.block("lambda"); }
  std::span<const double> weights() const { return params_.block("lambda"); }

  SparseFeatures features(std::span<const int> x) const;
  std::vector<double> dense_features(std::span<const int> x) const;

  double potential(std::span<const int> x) const override;
  void add_potential_grad(std::span<const int> x, double scale, std::span<double> grad) const override;

 private:
  std::size_t n_;
  FeatureFn fn_;
};

}  // namespace ebm
