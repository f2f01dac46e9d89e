// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ebm/numeric.hpp"

#include <algorithm>

namespace ebm {

double log_sum_exp(std::span<const double> v) {
  LogSumExp acc;
  for (double x : v) acc.add(x);
  return acc.value();
}

std::vector<double> log_softmax(std::span<const double> v) {
  const double z = log_sum_exp(v);
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] - z;
  return out;
}

std::vector<double> softmax(std::span<const double> v) {
  std::vector<double> out = log_softmax(v);
  for (double& x : out) x = std::exp(x);
  return out;
}

double max_relative_error(std::span<const double> a, std::span<const double> b, double floor) {
  double diff = 0.0, scale = floor;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max({scale, std::abs(a[i]), std::abs(b[i])});
  }
  return diff / scale;
}

}  // namespace ebm
