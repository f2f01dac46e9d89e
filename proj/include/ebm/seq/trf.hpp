// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "ebm/discrete_space.hpp"
#include "ebm/energy_model.hpp"
#include "ebm/learners.hpp"
#include "ebm/seq/ngram_alm.hpp"
#include "ebm/seq/ngram_features.hpp"
#include "ebm/tiny_net.hpp"

namespace ebm {

// U(x) = lambda . f(x) + sum_t net(onehot(x_{t-1}), onehot(x_t)), with x_0 = <s>.
// The neural term is present only when hidden > 0.
class SequencePotential {
 public:
  SequencePotential(NgramFeatureSet features, int vocab_size, std::size_t hidden = 0);

  // Adds "lambda" and, with a neural term, "net.*" blocks.
  void add_blocks(ParamVector& params);
  void init_neural(ParamVector& params, Rng& rng, double scale = 0.1) const;

  double value(const ParamVector& params, std::span<const int> x) const;
  void add_grad(const ParamVector& params, std::span<const int> x, double scale,
                std::span<double> grad) const;

  const NgramFeatureSet& features() const { return features_; }
  int vocab_size() const { return vocab_; }
  bool neural() const { return hidden_ > 0; }

 private:
  std::vector<double> net_input(std::span<const int> x, std::size_t t) const;

  NgramFeatureSet features_;
  int vocab_;
  std::size_t hidden_;
  DenseNet net_;
  std::size_t lambda_offset_ = 0, net_offset_ = 0;
};

// Add-one smoothed length frequencies over [1, max_len].
std::vector<double> length_probabilities(const std::vector<Config>& corpus, int max_len);

// p(l, x) = pi_l exp(U(x) - zeta_l). potential() includes log pi_l, so
// log_model() is the full log-probability. The feature set must not pad with
// </s>: the length is already explicit.
class TrfModel : public EnergyModel {
 public:
  TrfModel(SequencePotential potential, std::vector<double> pi);

  int max_length() const { return int(pi_.size()); }
  int vocab_size() const { return pot_.vocab_size(); }
  const std::vector<double>& pi() const { return pi_; }
  DiscreteSpace space() const { return DiscreteSpace::sequences(vocab_size(), 1, max_length()); }
  const SequencePotential& sequence_potential() const { return pot_; }
  void init_neural(Rng& rng, double scale = 0.1) { pot_.init_neural(params_, rng, scale); }

  double potential(std::span<const int> x) const override;
  void add_potential_grad(std::span<const int> x, double scale, std::span<double> grad) const override;
  std::size_t zeta_slot(std::span<const int> x) const override;

  // U(x) alone, without log pi_l.
  double sentence_potential(std::span<const int> x) const { return pot_.value(params_, x); }
  // log Z_l by enumerating V^l, for each l.
  std::vector<double> exact_log_normalizers() const;
  void set_zeta(std::span<const double> zeta);

 private:
  void check_length(std::span<const int> x) const;
  SequencePotential pot_;
  std::vector<double> pi_, log_pi_;
};

// log pi_l + U(x) - zeta_l.
double trf_log_prob(const TrfModel& trf, std::span<const int> x);

// p(x) = exp(U(x) + nu_l) / Z over all sequences of length 1..L, normalized
// once. With length features off, nu_l = 0.
class GnElm : public EnergyModel {
 public:
  GnElm(SequencePotential potential, int max_len, bool length_features = false);

  int max_length() const { return max_len_; }
  DiscreteSpace space() const { return DiscreteSpace::sequences(pot_.vocab_size(), 1, max_len_); }
  double potential(std::span<const int> x) const override;
  void add_potential_grad(std::span<const int> x, double scale, std::span<double> grad) const override;
  bool has_length_features() const { return length_features_; }

 private:
  SequencePotential pot_;
  int max_len_;
  bool length_features_;
};

// Length-aware bigram noise: l ~ pi, then a softmax bigram chain without an
// end symbol. Only the bigram logits are trained. With per_position, every
// (length, position) pair has its own transition table; that family contains
// every TRF whose features are unigrams and bigrams, which DNCE needs for
// consistency since its fixed point is alpha * data + (1 - alpha) * noise.
class BigramNoise : public TrainableDistribution {
 public:
  BigramNoise(int vocab_size, std::vector<double> pi, bool per_position = false);
  // Logits set to the log of the reference's end-free conditionals.
  void init_from(const NgramAlm& alm);

  Config sample(Rng& rng) const override;
  double log_prob(std::span<const int> x) const override;
  void mle_step(const std::vector<Config>& batch, double lr) override;

 private:
  std::size_t row(std::size_t len, std::size_t t, int prev) const;
  std::span<const double> row_log_probs(std::size_t r) const;
  void refresh();
  int vocab_;
  std::vector<double> pi_;
  bool per_position_;
  std::vector<std::size_t> table_offset_;  // first row of each (len, t) table
  std::vector<double> logits_, log_probs_;  // tables of (V + 1) x V, row 0 is <s>
};

// DNCE over (theta, zeta_1..zeta_L). Noise must cover every corpus sentence.
TrainingTrace train_trf_dnce(TrfModel& trf, const std::vector<Config>& corpus,
                             TrainableDistribution& noise, const DnceConfig& cfg);

// Mean log-probability of the sentences under the model's log_model().
double mean_log_prob(const EnergyModel& model, const std::vector<Config>& corpus);

}  // namespace ebm
