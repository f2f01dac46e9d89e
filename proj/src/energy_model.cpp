// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ebm/energy_model.hpp"

#include "ebm/error.hpp"

namespace ebm {

void EnergyModel::enable_zeta(std::size_t count, double init) {
  if (has_zeta()) throw InvalidArgument("zeta block already present");
  zeta_offset_ = params_.add_block("zeta", count, init);
  zeta_count_ = count;
}

std::size_t EnergyModel::zeta_slot(std::span<const int>) const { return 0; }

double EnergyModel::zeta(std::span<const int> x) const {
  if (!has_zeta()) return 0.0;
  const std::size_t s = zeta_slot(x);
  if (s >= zeta_count_) throw InvalidArgument("zeta slot out of range");
  return params_[zeta_offset_ + s];
}

double EnergyModel::log_model(std::span<const int> x) const { return potential(x) - zeta(x); }

void EnergyModel::add_log_model_grad(std::span<const int> x, double scale,
                                     std::span<double> grad) const {
  add_potential_grad(x, scale, grad);
  if (has_zeta()) grad[zeta_offset_ + zeta_slot(x)] -= scale;
}

}  // namespace ebm
