// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <span>
#include <vector>

#include "ebm/discrete_space.hpp"
#include "ebm/numeric.hpp"
#include "ebm/oracle.hpp"

namespace ebm {

// Frame symbols are labels 0..K-1 plus the blank, which is always id K.
// Frame potentials are T x (K + 1) matrices.

// Merge repeated symbols, then drop blanks.
std::vector<int> ctc_collapse(std::span<const int> path, int blank);

// Per-frame symbol occupancies of a path set: post(t, k) = p(pi_t = k).
struct PathOccupancy {
  double log_sum = kNegInf;  // log sum over paths of exp(path score)
  Matrix post;
};

// Blank-interleaved lattice for one label sequence: states b y1 b y2 ... yL b.
// A path may stay, advance by one, or skip a blank between distinct labels.
class CtcLattice {
 public:
  CtcLattice(std::vector<int> labels, int num_labels);

  std::size_t num_states() const { return 2 * labels_.size() + 1; }
  int blank() const { return num_labels_; }
  int symbol(std::size_t state) const;
  bool can_skip_to(std::size_t state) const;  // state - 2 -> state allowed
  // Fewest frames that can emit the labels: one per label plus a blank
  // between each adjacent repeat.
  std::size_t min_frames() const;

  // Log-sum and occupancies over lattice paths scored by sum_t phi(t, pi_t).
  // log_sum is -inf when T < min_frames().
  PathOccupancy forward_backward(const Matrix& phi) const;

 private:
  std::vector<int> labels_;
  int num_labels_;
};

struct CtcResult {
  double loss = kInf;  // -log p(y | x); +inf when infeasible
  Matrix grad;         // d loss / d logits; zero when infeasible
  bool feasible = false;
};

// Plain CTC with per-frame softmax over the K + 1 logits.
CtcResult ctc_loss_grad(const Matrix& logits, std::span<const int> labels);

// Best-path decoding: per-frame argmax, then collapse.
std::vector<int> ctc_greedy_decode(const Matrix& logits);

// n-gram model over label sequences with an end symbol (id K). Histories are
// padded on the left with a start marker. Estimated with add-one smoothing.
class LabelLm {
 public:
  LabelLm(int num_labels, int order);
  // Every arc weight 0: sum over paths of exp(node scores) only.
  static LabelLm flat(int num_labels, int order);

  void fit(const std::vector<std::vector<int>>& transcripts);

  int num_labels() const { return k_; }
  int order() const { return order_; }
  static constexpr int kStart = -1;

  // history holds the last order-1 symbols (kStart padded); next in [0, K].
  double log_prob(std::span<const int> history, int next) const;
  // Includes the end symbol.
  double sequence_log_prob(std::span<const int> labels) const;

 private:
  int k_, order_;
  bool flat_ = false;
  std::map<std::vector<int>, std::vector<double>> counts_;
};

// CTC topology composed with a label n-gram model. A state is (LM history,
// last frame symbol if it was a label); only reachable states are built.
// Arcs are deterministic on the frame symbol. Emitting a new label carries
// its LM log-probability; blanks and repeats carry 0; each state has a final
// weight log p(</s> | history).
class DenominatorGraph {
 public:
  explicit DenominatorGraph(LabelLm lm);

  const LabelLm& lm() const { return lm_; }
  int num_symbols() const { return lm_.num_labels() + 1; }
  std::size_t num_states() const { return next_.size(); }
  static constexpr std::size_t kStartState = 0;
  // Reachable states never exceed 2 * sum_{j<n} K^j for n >= 2 (K + 1 for a
  // unigram model, which still tracks the last label to merge repeats).
  static std::size_t state_bound(int num_labels, int order);

  std::size_t next(std::size_t state, int symbol) const { return next_[state][std::size_t(symbol)]; }
  double arc_weight(std::size_t state, int symbol) const { return weight_[state][std::size_t(symbol)]; }
  double final_weight(std::size_t state) const { return final_[state]; }

  // Accumulated arc and final weights along a frame path.
  double path_weight(std::span<const int> path) const;

  // Log-sum and occupancies over all frame paths of length T scored by
  // node potentials plus graph weights.
  PathOccupancy forward_backward(const Matrix& phi) const;
  // Highest-scoring frame path (node potentials plus graph weights).
  std::vector<int> best_path(const Matrix& phi) const;

 private:
  LabelLm lm_;
  std::vector<std::vector<std::size_t>> next_;
  std::vector<std::vector<double>> weight_;
  std::vector<double> final_;
};

struct CtcCrfResult {
  double loss = kInf;  // -log p(y | x)
  Matrix grad;         // d loss / d phi: denominator minus numerator occupancy
  double log_numerator = kNegInf;
  double log_denominator = kNegInf;
  bool feasible = false;
};

// phi(pi, x) = log p_LM(B(pi)) + sum_t phi(t, pi_t). The numerator runs on
// the label lattice (every path there collapses to y, so its LM weight is the
// constant log p_LM(y)); the denominator runs on the graph.
CtcCrfResult ctc_crf_loss_grad(const Matrix& phi, std::span<const int> labels,
                               const DenominatorGraph& graph);

// CTC as a latent-variable model: x is the label sequence, h the frame path,
// parameters the logits. Used to check the Fisher identity by enumeration.
class CtcPathModel : public LatentVariableModel {
 public:
  explicit CtcPathModel(Matrix logits);
  std::size_t num_params() const override { return logits_.data.size(); }
  DiscreteSpace latent_space(std::span<const int> x) const override;
  double log_joint(std::span<const int> x, std::span<const int> h) const override;
  void add_log_joint_grad(std::span<const int> x, std::span<const int> h, double scale,
                          std::span<double> grad) const override;
  std::vector<double> log_marginal_grad(std::span<const int> x) const override;

 private:
  Matrix logits_, log_probs_;
};

}  // namespace ebm
