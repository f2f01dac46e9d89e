// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "ebm/energy_model.hpp"
#include "ebm/seq/ngram_alm.hpp"
#include "ebm/seq/ngram_features.hpp"

namespace ebm {

// Sequences of a fixed length T with p(x) proportional to q(x) exp(-E(x)),
// where q is the end-free law of an n-gram reference. Conditioning on a
// prefix x_1..x_c gives the residual model of the continuation.
class ResidualElm : public EnergyModel {
 public:
  ResidualElm(const NgramAlm& reference, int length, NgramFeatureSet features);

  int length() const { return length_; }
  const NgramAlm& reference() const { return ref_; }
  const NgramFeatureSet& features() const { return features_; }

  // E(x) = -lambda . f(x). Subclasses may replace it; +inf forbids x.
  virtual double energy(std::span<const int> x) const;
  // grad += scale * dE/dtheta.
  virtual void add_energy_grad(std::span<const int> x, double scale, std::span<double> grad) const;

  // log q(x) - E(x) for a full-length x.
  double potential(std::span<const int> x) const override;
  void add_potential_grad(std::span<const int> x, double scale, std::span<double> grad) const override;

  // Reference conditional over the next word (size V).
  std::vector<double> reference_next(std::span<const int> prefix) const;
  // log E_{q(.|prefix)}[exp(-E)] by enumerating the continuations.
  double exact_log_z(std::span<const int> prefix = {}) const;
  // Exact log p(token | prefix) under the residual model.
  double exact_step_log_prob(std::span<const int> prefix, int token) const;

 private:
  void check(std::span<const int> x) const;
  const NgramAlm& ref_;
  int length_;
  NgramFeatureSet features_;
};

// Continues `prefix` to the model length, sampling each word from the k most
// probable reference words (ties to the smaller id), renormalized.
Config topk_reference_sample(const ResidualElm& model, std::span<const int> prefix, int k, Rng& rng);

struct TopkSample {
  Config sentence;
  std::size_t chosen = 0;  // index into proposals
  std::vector<Config> proposals;
};

// n top-k reference proposals, one resampled with weight exp(-E).
TopkSample residual_topk_sample(const ResidualElm& model, std::span<const int> prefix, std::size_t n,
                                int k, std::uint64_t seed);

// T_n = log mean exp(-E_i) and (2n - 1) T_n - 2 (n - 1) T_{n-1}. T_{n-1} is
// averaged over the n leave-one-out subsets: same expectation as dropping a
// single sample, far smaller variance. Needs n >= 2.
struct PartitionPair {
  double lower = 0;
  double upper = 0;
};
PartitionPair partition_pair(std::span<const double> energies);

struct PartitionBounds {
  double lower_mean = 0, upper_mean = 0;
  double lower_se = 0, upper_se = 0;  // standard errors of the means
  std::size_t repeats = 0;
};

// Monte Carlo means of both estimators of log Z(prefix) over independent
// repeats, each using n fresh reference continuations.
PartitionBounds partition_bounds(const ResidualElm& model, std::size_t n, std::size_t repeats,
                                 std::uint64_t seed, std::span<const int> prefix = {});

struct StepBounds {
  double lower = 0;  // log-probability bounds
  double upper = 0;
  bool exact = false;
};

struct StepwiseOptions {
  // The samples are split into groups; each group yields one pair of
  // partition estimates for the numerator and for the denominator.
  std::size_t groups = 8;
  // Widening in standard errors of the group means; 0 gives the raw plug-in.
  double sigmas = 3.0;
};

// Bounds on log p(token | prefix): the numerator's lower estimator with the
// denominator's upper one, and vice versa, each averaged over the groups and
// widened by `sigmas` standard errors. At the final position the future is
// empty and the value is computed exactly.
StepBounds stepwise_prob(const ResidualElm& model, std::span<const int> prefix, int token,
                         std::size_t mc_samples, std::uint64_t seed, const StepwiseOptions& opts = {});

}  // namespace ebm
