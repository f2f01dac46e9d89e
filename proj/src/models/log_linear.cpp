// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ebm/models/log_linear.hpp"

#include "ebm/error.hpp"

namespace ebm {

LogLinearModel::LogLinearModel(std::size_t num_features, FeatureFn features)
    : n_(num_features), fn_(std::move(features)) {
  params_.add_block("lambda", n_);
}

SparseFeatures LogLinearModel::features(std::span<const int> x) const {
  SparseFeatures f;
  fn_(x, f);
  for (const auto& [i, v] : f)
    if (i >= n_) throw ShapeMismatch("feature index out of range");
  return f;
}

std::vector<double> LogLinearModel::dense_features(std::span<const int> x) const {
  std::vector<double> d(n_, 0.0);
  for (const auto& [i, v] : features(x)) d[i] += v;
  return d;
}

double LogLinearModel::potential(std::span<const int> x) const {
  SparseFeatures f;
  fn_(x, f);
  double u = 0;
  for (const auto& [i, v] : f) u += params_[i] * v;
  return u;
}

void LogLinearModel::add_potential_grad(std::span<const int> x, double scale,
                                        std::span<double> grad) const {
  SparseFeatures f;
  fn_(x, f);
  for (const auto& [i, v] : f) grad[i] += scale * v;
}

}  // namespace ebm
