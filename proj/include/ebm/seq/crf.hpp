// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ebm/discrete_space.hpp"
#include "ebm/energy_model.hpp"
#include "ebm/numeric.hpp"
#include "ebm/param_vector.hpp"
#include "ebm/rng.hpp"
#include "ebm/tiny_net.hpp"

namespace ebm {

// Chain dynamic programs on raw potentials. phi is T x K node potentials;
// trans is (K + 1) x K with row K holding the start scores for t = 1.
// U(y) = sum_t phi(t, y_t) + trans(y_{t-1}, y_t), y_0 = start.

struct ChainPosteriors {
  double log_z = kNegInf;
  double log_z_backward = kNegInf;  // from the betas; equals log_z up to rounding
  Matrix alpha, beta;               // T x K, log domain
  Matrix node;                      // T x K, p(y_t = k | x)
  std::vector<Matrix> edges;        // edges[t] is (K + 1) x K for the pair (t - 1, t)
  Matrix edge_counts;               // sum_t edges[t]
};

double chain_score(const Matrix& phi, const Matrix& trans, std::span<const int> y);
double chain_log_partition(const Matrix& phi, const Matrix& trans);
ChainPosteriors chain_forward_backward(const Matrix& phi, const Matrix& trans);

struct ChainDecode {
  std::vector<int> labels;
  double score = kNegInf;
};

// Exact argmax. Among tied optima the lexicographically smallest labeling
// wins (smallest id at the leftmost difference).
ChainDecode chain_viterbi(const Matrix& phi, const Matrix& trans);

struct TaggedSentence {
  std::vector<int> words;
  std::vector<int> labels;
};

struct CrfOptions {
  int window = 0;          // node inputs see words t - window .. t + window
  std::size_t hidden = 0;  // 0: linear node features; > 0: tanh net with this width
};

// Linear-chain CRF over word ids [0, V) and labels [0, K). The class holds the
// structure only; parameters live in a caller-owned ParamVector so the same
// CRF can sit inside a larger model.
//
// Node potentials come from a one-hot window over the words (out-of-range
// positions use a padding id V). Linear: phi = lambda^T f. Neural: a one
// hidden layer net maps the window to K logits.
class LinearChainCrf {
 public:
  LinearChainCrf(int vocab_size, int num_labels, CrfOptions opts = {});

  int vocab_size() const { return vocab_; }
  int num_labels() const { return labels_; }
  const CrfOptions& options() const { return opts_; }
  std::size_t input_size() const { return std::size_t((2 * opts_.window + 1) * (vocab_ + 1)); }

  // Adds "crf.node" (or "crf.net.*") and "crf.trans" blocks.
  void add_blocks(ParamVector& params);
  void init(ParamVector& params, Rng& rng, double scale = 0.1) const;

  Matrix node_potentials(const ParamVector& params, std::span<const int> x) const;
  Matrix transitions(const ParamVector& params) const;
  // grad += scale * (dphi . dphi/dtheta + dtrans . dtrans/dtheta).
  void add_grad(const ParamVector& params, std::span<const int> x, const Matrix& dphi,
                const Matrix& dtrans, double scale, std::span<double> grad) const;

  double score(const ParamVector& params, std::span<const int> x, std::span<const int> y) const;
  double log_partition(const ParamVector& params, std::span<const int> x) const;
  double log_conditional(const ParamVector& params, std::span<const int> x,
                         std::span<const int> y) const;
  ChainPosteriors posteriors(const ParamVector& params, std::span<const int> x) const;
  ChainDecode viterbi(const ParamVector& params, std::span<const int> x) const;

  // grad += scale * d log Z(x) / dtheta (expected features under p(y|x)).
  void add_log_partition_grad(const ParamVector& params, std::span<const int> x, double scale,
                              std::span<double> grad) const;
  // grad += scale * dU(x, y) / dtheta.
  void add_score_grad(const ParamVector& params, std::span<const int> x, std::span<const int> y,
                      double scale, std::span<double> grad) const;

 private:
  void check(std::span<const int> x) const;
  std::vector<int> window_ids(std::span<const int> x, std::size_t t) const;

  int vocab_, labels_;
  CrfOptions opts_;
  DenseNet net_;
  std::size_t node_offset_ = 0, trans_offset_ = 0;
  bool has_blocks_ = false;
};

// Summed -log p(y | x) over the batch, with its gradient.
ObjectiveValue crf_cml_loss(const LinearChainCrf& crf, const ParamVector& params,
                            const std::vector<TaggedSentence>& batch);

struct CrfTrainConfig {
  std::uint64_t steps = 1000;
  std::size_t batch = 10;
  double lr = 0.05;  // Adam step size
  double l2 = 1e-3;
  std::uint64_t seed = 0;
  // Called after each update with the step and the mean batch loss.
  std::function<void(std::uint64_t, double)> on_step;
};

// Minibatch Adam on the mean conditional log-likelihood. Batches are drawn
// from Rng(seed, 0), matching jrf_semi_train's labeled stream.
void crf_cml_train(const LinearChainCrf& crf, ParamVector& params,
                   const std::vector<TaggedSentence>& data, const CrfTrainConfig& cfg);

// Token accuracy of Viterbi decoding.
double crf_accuracy(const LinearChainCrf& crf, const ParamVector& params,
                    const std::vector<TaggedSentence>& data);

}  // namespace ebm
