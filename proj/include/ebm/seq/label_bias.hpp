// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ebm {

// Three training sentences (one with a wrong verb form), two test sentences,
// a smoothed bigram ALM and a globally normalized bigram-feature ELM.
struct LabelBiasReport {
  double epsilon = 0;
  // Bigram ALM probabilities of the two test sentences.
  double alm_alice_likes_tea = 0;
  double alm_tom_like_tea = 0;
  // Trained ELM.
  std::vector<std::string> feature_names;
  std::vector<double> lambda;
  double elm_alice_likes_tea = 0;  // log-probabilities
  double elm_tom_like_tea = 0;
  double log_z = 0;
  int steps = 0;
  double l2 = 0;
};

struct LabelBiasConfig {
  double epsilon = 0.1;  // smoothing mass of unseen successors
  int steps = 5000;
  double lr = 1.0;
  double l2 = 1e-3;
};

LabelBiasReport label_bias_demo(const LabelBiasConfig& cfg = {});

// Published reference values for the trained ELM, listed next to ours.
inline constexpr double kPublishedAliceLikesTea = -7.06;
inline constexpr double kPublishedTomLikeTea = -7.79;
inline constexpr double kPublishedLogZ = 19.98;

void write_label_bias_report(std::ostream& out, const LabelBiasReport& r);

}  // namespace ebm
