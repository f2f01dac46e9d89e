// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "ebm/energy_model.hpp"
#include "ebm/samplers.hpp"
#include "ebm/seq/ngram_alm.hpp"

namespace ebm {

struct Expert {
  std::string name;
  double weight = 1.0;
  std::function<double(std::span<const int>)> energy;
};

// sum_i weight_i * E_i(x).
double poe_energy(const std::vector<Expert>& experts, std::span<const int> x);

// -log q(x) under the fixed-length law of the reference.
Expert fluency_expert(const NgramAlm& alm, double weight = 1.0);
// `penalty` when the keyword is absent, 0 otherwise.
Expert keyword_expert(int keyword, double penalty = 1.0, double weight = 1.0);
// Number of positions where x differs from the source (same length).
Expert hamming_expert(Config source, double weight = 1.0);

// exp(-poe_energy) as a parameter-free EnergyModel.
class PoeTarget : public EnergyModel {
 public:
  explicit PoeTarget(std::vector<Expert> experts);
  double potential(std::span<const int> x) const override { return -poe_energy(experts_, x); }
  void add_potential_grad(std::span<const int>, double, std::span<double>) const override {}

 private:
  std::vector<Expert> experts_;
};

// Redraws a word uniformly among all vocabulary entries.
class UniformWordProposal : public CoordinateProposal {
 public:
  explicit UniformWordProposal(int vocab_size) : vocab_(vocab_size) {}
  int sample(std::span<const int>, std::size_t, Rng& rng) const override {
    return int(rng.uniform_int(std::uint64_t(vocab_)));
  }
  double log_density(int, std::span<const int>, std::size_t) const override {
    return -std::log(double(vocab_));
  }

 private:
  int vocab_;
};

}  // namespace ebm
