// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "ebm/discrete_space.hpp"
#include "ebm/seq/vocab.hpp"

namespace ebm {

struct NbestEntry {
  std::string utterance;
  double alm_score = 0;  // log-probability from the first pass
  Config sentence;
};

struct RescoredEntry {
  NbestEntry entry;
  std::size_t original_rank = 0;
  double model_score = 0;
  double combined = 0;  // (1 - w) * alm + w * model
};

// Sorted by combined score, best first; ties keep the original order.
std::vector<RescoredEntry> rescore_nbest(const std::vector<NbestEntry>& nbest,
                                         const std::function<double(std::span<const int>)>& model_score,
                                         double weight);

// TSV rows: utterance-id, ALM score, sentence.
std::vector<NbestEntry> read_nbest(std::istream& in, Vocab& vocab, bool grow = false);
void write_nbest(std::ostream& out, const Vocab& vocab, const std::vector<RescoredEntry>& ranked);

}  // namespace ebm
