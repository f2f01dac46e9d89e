// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ebm/energy_model.hpp"
#include "ebm/samplers.hpp"

namespace ebm {

// Square lattice of +-1 spins with free boundaries.
// U(x) = beta * (J * sum_{i~j} x_i x_j + H * sum_i x_i); theta = (J, H).
class IsingModel : public EnergyModel, public FullConditionals {
 public:
  IsingModel(int side, double coupling, double field, double beta);

  int side() const { return side_; }
  int num_spins() const { return side_ * side_; }
  double beta() const { return beta_; }
  double coupling() const { return params_[0]; }
  double field() const { return params_[1]; }

  double potential(std::span<const int> x) const override;
  void add_potential_grad(std::span<const int> x, double scale, std::span<double> grad) const override;

  std::size_t num_sites() const override { return std::size_t(num_spins()); }
  const std::vector<int>& site_values(std::size_t) const override { return values_; }
  void conditional_log_weights(std::span<const int> x, std::size_t site,
                               std::span<double> out) const override;

  // Sum of the 4-neighborhood spins of `site`.
  int neighbor_sum(std::span<const int> x, std::size_t site) const;

 private:
  int side_;
  double beta_;
  std::vector<int> values_ = {-1, 1};
};

// P(x_i = +1 | rest) = sigmoid(2 beta (J * neighbor_sum + H)).
double ising_gibbs_conditional(const IsingModel& model, std::size_t site, std::span<const int> x);

double magnetization(std::span<const int> spins);

struct IsingRun {
  std::vector<Config> snapshots;
  std::vector<double> abs_magnetization;  // one entry per sweep
  double mean_abs_magnetization = 0.0;    // after burn-in
};

// Gibbs sweeps from a random start. A snapshot is kept every
// `snapshot_every` sweeps (0 keeps only the final state).
IsingRun ising_sample_grid(const IsingModel& model, std::uint64_t sweeps, std::uint64_t seed,
                           std::uint64_t snapshot_every = 0, double burn_in_fraction = 0.1);

// Plain (ASCII) PGM: +1 white, -1 black, each spin drawn as scale x scale pixels.
void write_spin_pgm(std::ostream& out, std::span<const int> spins, int side, int scale = 1,
                    const std::string& comment = {});

}  // namespace ebm
