// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <limits>
#include <span>

namespace ebm {

// Counter-based generator. The output at position n depends only on
// (key, n), so streams keyed by (seed, chain, step) can be created in any
// order without coordination.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0);

  // Stream for (seed, chain, step); independent of every other triple.
  static Rng keyed(std::uint64_t seed, std::uint64_t chain, std::uint64_t step);

  // Child stream; the parent is not advanced.
  Rng split(std::uint64_t id) const;

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next(); }

  std::uint64_t next();
  double uniform();                   // [0, 1)
  double uniform(double lo, double hi);
  double normal();                    // standard normal, Box-Muller
  std::uint64_t uniform_int(std::uint64_t n);  // [0, n)
  bool bernoulli(double p) { return uniform() < p; }

  // Draw an index from unnormalized non-negative weights.
  std::size_t categorical(std::span<const double> weights);
  // Draw an index from unnormalized log-weights.
  std::size_t categorical_log(std::span<const double> log_weights);

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  Rng(std::uint64_t key, std::uint64_t counter, int) : key_(key), counter_(counter) {}
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x);

}  // namespace ebm
