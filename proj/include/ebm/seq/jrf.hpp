// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "ebm/discrete_space.hpp"
#include "ebm/energy_model.hpp"
#include "ebm/learners.hpp"
#include "ebm/seq/crf.hpp"

namespace ebm {

// Joint random field over (l, x, y): p = pi_l exp(U(x, y) - zeta_l) with U a
// linear-chain CRF potential. As an EnergyModel over word sequences it is the
// marginal: potential(x) = log pi_l + log sum_y exp U(x, y), so DNCE and the
// other learners train it on unlabeled text directly. Parameters: the CRF
// blocks, then one zeta slot per length.
class JrfModel : public EnergyModel {
 public:
  JrfModel(LinearChainCrf crf, std::vector<double> pi);

  const LinearChainCrf& crf() const { return crf_; }
  int max_length() const { return int(pi_.size()); }
  const std::vector<double>& pi() const { return pi_; }
  DiscreteSpace space() const { return DiscreteSpace::sequences(crf_.vocab_size(), 1, max_length()); }
  void init(Rng& rng, double scale = 0.1) { crf_.init(params_, rng, scale); }

  double potential(std::span<const int> x) const override;
  void add_potential_grad(std::span<const int> x, double scale, std::span<double> grad) const override;
  std::size_t zeta_slot(std::span<const int> x) const override;

  // log sum_y exp U(x, y), by the forward algorithm.
  double marginal_potential(std::span<const int> x) const;
  double log_joint(std::span<const int> x, std::span<const int> y) const;
  double log_marginal(std::span<const int> x) const { return log_model(x); }
  double log_conditional(std::span<const int> x, std::span<const int> y) const;

  // log Z_l = log sum_{x of length l} exp U(x), by enumeration.
  std::vector<double> exact_log_normalizers() const;
  void set_zeta(std::span<const double> zeta);

 private:
  void check_length(std::span<const int> x) const;
  LinearChainCrf crf_;
  std::vector<double> pi_, log_pi_;
};

double jrf_marginal_potential(const JrfModel& jrf, std::span<const int> x);

struct JrfSemiConfig {
  std::uint64_t steps = 1000;
  std::size_t labeled_batch = 10;
  std::size_t unlabeled_batch = 10;  // |D|; |B1| = |D| and |B2| = 2|D|
  double alpha = 1.0;                // weight of the unsupervised objective
  double lr = 0.05;                  // Adam step size
  double l2 = 1e-3;                  // on CRF parameters only
  double noise_lr = 0.5;
  std::uint64_t seed = 0;
};

struct JrfTrainReport {
  double last_supervised_loss = 0.0;    // mean -log p(y|x) over the last labeled batch
  double last_unsupervised_value = 0.0;  // DNCE objective on the last unlabeled batch
};

// Each step: a CML gradient on a labeled batch (stream Rng(seed, 0), the same
// stream crf_cml_train uses) plus alpha times a DNCE gradient on an unlabeled
// batch with noise batches drawn from `noise`; one Adam step on the sum; then
// one MLE step of the noise on the unlabeled batch. alpha = 0 reproduces
// crf_cml_train on the CRF parameters exactly.
JrfTrainReport jrf_semi_train(JrfModel& jrf, const std::vector<TaggedSentence>& labeled,
                              const std::vector<std::vector<int>>& unlabeled,
                              TrainableDistribution& noise, const JrfSemiConfig& cfg);

}  // namespace ebm
