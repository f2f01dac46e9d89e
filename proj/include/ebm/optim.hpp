// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

namespace ebm {

// Adam on a flat parameter vector. descend() moves against the gradient.
class Adam {
 public:
  explicit Adam(double lr = 0.01, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), b1_(beta1), b2_(beta2), eps_(eps) {}

  void descend(std::span<double> theta, std::span<const double> grad);
  void ascend(std::span<double> theta, std::span<const double> grad);
  void reset() { m_.clear(), v_.clear(), t_ = 0; }
  double lr() const { return lr_; }
  void set_lr(double lr) { lr_ = lr; }

 private:
  double lr_, b1_, b2_, eps_;
  std::vector<double> m_, v_;
  long t_ = 0;
};

}  // namespace ebm
