// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ebm/numeric.hpp"
#include "ebm/optim.hpp"
#include "ebm/param_vector.hpp"
#include "ebm/rng.hpp"
#include "ebm/seq/crf.hpp"
#include "ebm/tiny_net.hpp"

namespace ebm {

// kA: phi = f, psi = g. kB: both locally log-softmaxed over the K labels.
enum class PotentialDesign { kA, kB };

struct TransducerOptions {
  int window = 1;                         // transcription input: words t - window .. t + window
  std::size_t transcription_hidden = 16;  // 0: linear transcription layer
  std::size_t embedding = 8;
  std::size_t prediction_hidden = 16;
  PotentialDesign design = PotentialDesign::kA;
};

// Globally normalized transducer: u(y, x) = sum_i phi_i(y_i, x) + psi_i(y_{0:i-1}, y_i).
// The transcription net maps a one-hot word window to f_i in R^K; the
// prediction net runs a recurrent cell over label embeddings (y_0 = start)
// and maps each state to g_i in R^K, so psi_i sees the whole label history.
class CrfTransducer {
 public:
  CrfTransducer(int vocab_size, int num_labels, TransducerOptions opts = {});

  int vocab_size() const { return vocab_; }
  int num_labels() const { return labels_; }
  const TransducerOptions& options() const { return opts_; }

  // Adds "crft.trans_net.*", "crft.embed", "crft.cell", "crft.pred_out.*".
  void add_blocks(ParamVector& params);
  void init(ParamVector& params, Rng& rng, double scale = 0.1) const;

  // Node potentials phi_i(k) for every position (design applied).
  Matrix node_potentials(const ParamVector& params, std::span<const int> x) const;

  // A label prefix with its recurrent state, for incremental scoring.
  struct Prefix {
    std::vector<int> labels;
    std::vector<double> hidden;
    double score = 0.0;  // u(labels, x) over the prefix
  };
  // hidden is the recurrent state that scores the next position, so the
  // empty prefix has already consumed the start embedding.
  Prefix start(const ParamVector& params) const;
  // psi_i(prefix, k) for the next position i = prefix length.
  std::vector<double> clique_potentials(const ParamVector& params, const Prefix& p) const;
  Prefix extend(const ParamVector& params, const Matrix& phi, const Prefix& p, int k,
                std::span<const double> psi) const;

  // u(y_{1:j}, x) for a prefix of length j <= |x|.
  double score(const ParamVector& params, std::span<const int> x, std::span<const int> y) const;
  // grad += scale * du(y_{1:j}, x) / dtheta.
  void add_score_grad(const ParamVector& params, std::span<const int> x, std::span<const int> y,
                      double scale, std::span<double> grad) const;

 private:
  std::vector<double> window_input(std::span<const int> x, std::size_t t) const;
  std::span<const double> block(const ParamVector& params, std::size_t off, std::size_t n) const {
    return params.values().subspan(off, n);
  }

  int vocab_, labels_;
  TransducerOptions opts_;
  DenseNet trans_net_, pred_out_;
  SimpleRecurrentCell cell_;
  std::size_t trans_off_ = 0, embed_off_ = 0, cell_off_ = 0, out_off_ = 0;
  bool has_blocks_ = false;
};

// Beam search keeping the W best prefixes at each step. Ties go to the
// lexicographically smaller label prefix.
std::vector<CrfTransducer::Prefix> crft_beam(const CrfTransducer& model, const ParamVector& params,
                                             std::span<const int> x, std::size_t width);
std::vector<int> crft_decode(const CrfTransducer& model, const ParamVector& params,
                             std::span<const int> x, std::size_t width);

// -log p(y | x) with Z(x) by enumerating K^T labelings.
double crft_exact_loss(const CrfTransducer& model, const ParamVector& params,
                       std::span<const int> x, std::span<const int> y);

struct EarlyUpdate {
  double loss = 0.0;
  std::vector<double> gradient;
  std::size_t step = 0;  // prefix length the loss was taken at
  bool early = false;    // the oracle fell out of the beam
};

// Beam search with early updates: if the oracle prefix drops out of the beam
// at step j, the loss is -u(y*_{1:j}) + log sum_{y' in B_j + oracle} exp u(y'_{1:j});
// otherwise the same form at j = T.
EarlyUpdate crft_early_update_loss(const CrfTransducer& model, const ParamVector& params,
                                   std::span<const int> x, std::span<const int> y,
                                   std::size_t width);

struct TransducerTrainConfig {
  std::uint64_t steps = 1000;
  std::size_t batch = 8;
  std::size_t width = 4;
  double lr = 0.01;  // Adam
  double l2 = 0.0;
  std::uint64_t seed = 0;
  // Called after each update with the step and the mean batch loss.
  std::function<void(std::uint64_t, double)> on_step;
};

struct TransducerTrainReport {
  std::uint64_t updates = 0;
  std::uint64_t early_updates = 0;
  double last_loss = 0.0;
};

TransducerTrainReport crft_train_beam(const CrfTransducer& model, ParamVector& params,
                                      const std::vector<TaggedSentence>& data,
                                      const TransducerTrainConfig& cfg);

double crft_accuracy(const CrfTransducer& model, const ParamVector& params,
                     const std::vector<TaggedSentence>& data, std::size_t width);

}  // namespace ebm
