// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <span>
#include <vector>

#include "ebm/discrete_space.hpp"
#include "ebm/rng.hpp"

namespace ebm {

// Interpolated absolute-discount n-gram model over words 0..V-1 plus an end
// symbol at index V. The lowest level interpolates with the uniform law, so
// every conditional is strictly positive. Histories are left-padded with
// order - 1 copies of <s>.
class NgramAlm {
 public:
  NgramAlm(int order, int vocab_size, double discount = 0.75);

  // Adds the corpus counts; may be called more than once.
  void fit(const std::vector<Config>& corpus);

  int order() const { return order_; }
  int vocab_size() const { return vocab_; }
  int eos_index() const { return vocab_; }
  double discount() const { return d_; }

  // p(. | prefix) over V words then the end symbol; sums to one.
  std::vector<double> next_probs(std::span<const int> prefix) const;
  // Same with the end symbol removed and the words renormalized (size V).
  std::vector<double> next_probs_no_eos(std::span<const int> prefix) const;

  // log p(x, </s>).
  double log_prob(std::span<const int> sentence) const;
  // log of the fixed-length law: every step uses next_probs_no_eos.
  double log_prob_fixed_length(std::span<const int> sentence) const;

  // Ancestral sample until </s>; throws NumericalError after max_len words.
  Config sample(Rng& rng, std::size_t max_len = 1000) const;
  // Continues `prefix` to exactly `length` words.
  Config sample_fixed_length(Rng& rng, std::size_t length, std::span<const int> prefix = {}) const;

 private:
  struct Stats {
    std::map<int, double> next;
    double total = 0;
  };
  std::vector<int> history(std::span<const int> prefix, int k) const;
  void probs_into(std::span<const int> prefix, std::vector<double>& out) const;

  int order_, vocab_;
  double d_;
  std::vector<std::map<std::vector<int>, Stats>> levels_;  // levels_[k]: history length k
};

}  // namespace ebm
