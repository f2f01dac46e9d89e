// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ebm/numeric.hpp"
#include "ebm/rng.hpp"
#include "ebm/seq/crf.hpp"

namespace ebm {

// Synthetic sequence tasks and the seeded model comparisons run on them.

std::size_t edit_distance(std::span<const int> a, std::span<const int> b);

// ---------------------------------------------------------------------------
// Long-range agreement: words 0/1 open a sentence and carry labels 0/1;
// words 2..5 in the middle carry labels 2 (words 2, 3) or 3 (words 4, 5); the
// closing word 6 must repeat the opening label. Lengths are 4..7, so a
// first-order chain with a +-1 word window can only guess the last label.
std::vector<TaggedSentence> long_range_agreement_data(Rng& rng, std::size_t n);

struct LongRangeOptions {
  std::size_t train = 300, test = 300;
  std::uint64_t crf_steps = 500;
  std::uint64_t transducer_steps = 400;
  std::size_t width = 4;
};

struct LongRangeResult {
  double crf_accuracy = 0;
  double transducer_accuracy = 0;
};

LongRangeResult run_long_range_comparison(std::uint64_t seed, const LongRangeOptions& opts = {});

// ---------------------------------------------------------------------------
// Hidden Markov tagging data.
struct Hmm {
  int vocab = 0, labels = 0;
  std::vector<double> start;
  std::vector<std::vector<double>> transition, emission;
};

// Transitions favor k -> k + 1 (mod K); emissions are log-normal weights with
// the given spread, so words are shared across labels.
Hmm random_hmm(Rng& rng, int vocab, int labels, double emission_spread = 1.0);
// Length uniform in [2, max_len].
TaggedSentence sample_hmm(const Hmm& hmm, Rng& rng, int max_len);

struct SslOptions {
  int vocab = 20, labels = 3, max_len = 8;
  std::size_t labeled = 50;
  std::size_t unlabeled_ratio = 20;
  std::size_t test = 1000;
  std::uint64_t steps = 2000;
  double alpha = 3.0;
};

struct SslResult {
  double supervised_accuracy = 0;
  double semi_supervised_accuracy = 0;
};

// Supervised CRF vs a JRF trained on the same labels plus unlabeled text.
SslResult run_jrf_ssl_comparison(std::uint64_t seed, const SslOptions& opts = {});

// ---------------------------------------------------------------------------
// Frame-level recognition: label sequences follow a bigram chain that moves
// k -> k + 1 (mod K) with probability `stickiness`; each label spans 1-2
// frames with optional blanks between. Frame features are the one-hot frame
// symbol plus Gaussian noise.
struct FrameUtterance {
  Matrix features;  // T x (K + 1)
  std::vector<int> labels;
};

struct FrameTaskOptions {
  int labels = 4;
  double stickiness = 0.85;
  double noise = 0.9;
  std::size_t train = 200, test = 200;
  std::size_t epochs = 10;
  double lr = 0.05;
};

std::vector<FrameUtterance> bigram_frame_data(Rng& rng, std::size_t n, const FrameTaskOptions& opts);

struct CtcComparison {
  double ctc_error = 0;      // token error rate, greedy decoding
  double ctc_crf_error = 0;  // token error rate, best path through the denominator graph
};

// The same per-frame linear network trained with CTC and with CTC-CRF
// (bigram label LM from the training transcripts).
CtcComparison run_ctc_crf_comparison(std::uint64_t seed, const FrameTaskOptions& opts = {});

}  // namespace ebm
