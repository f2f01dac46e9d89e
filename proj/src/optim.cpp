// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ebm/optim.hpp"

#include <cmath>

#include "ebm/error.hpp"

namespace ebm {

void Adam::descend(std::span<double> theta, std::span<const double> grad) {
  if (theta.size() != grad.size()) throw ShapeMismatch("Adam: gradient size");
  if (m_.size() != theta.size()) m_.assign(theta.size(), 0.0), v_.assign(theta.size(), 0.0), t_ = 0;
  ++t_;
  const double c1 = 1.0 - std::pow(b1_, double(t_));
  const double c2 = 1.0 - std::pow(b2_, double(t_));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    m_[i] = b1_ * m_[i] + (1 - b1_) * grad[i];
    v_[i] = b2_ * v_[i] + (1 - b2_) * grad[i] * grad[i];
    theta[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
  }
}

void Adam::ascend(std::span<double> theta, std::span<const double> grad) {
  std::vector<double> neg(grad.begin(), grad.end());
  for (auto& g : neg) g = -g;
  descend(theta, neg);
}

}  // namespace ebm
