// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ebm/discrete_space.hpp"
#include "ebm/models/log_linear.hpp"

namespace ebm {

class Vocab;

// One position of a template, relative to the current word w_0. A slot with
// lo < hi is tied: any offset in [lo, hi] instantiates the same feature.
struct FeatureSlot {
  int lo = 0;
  int hi = 0;
  bool use_class = false;
};

struct FeatureTemplate {
  std::string name;
  std::vector<FeatureSlot> slots;
};

// Template families by short code: "w" and "c" (n-grams up to `order`),
// "ws", "cs" (skipping n-grams), "wsh", "csh" (long skips), "cpw"
// (class-predict-word) and "tied" (skip distances 6..9 sharing a weight).
std::vector<FeatureTemplate> feature_templates(std::string_view code, int order = 4);

// Greedy exchange clustering: words move one at a time to the class that
// most increases the class-bigram log-likelihood, until a pass changes
// nothing. Returns the class of each word id.
std::vector<int> exchange_word_classes(const std::vector<Config>& corpus, int vocab_size,
                                       int num_classes, int max_passes = 20);

struct FeatureSetOptions {
  bool bos = true;  // pad the left boundary with <s>
  bool eos = true;  // append </s> and let features predict it
};

// Position-independent count features over sentences. Only instantiations
// seen by index() get a weight; others are silently dropped at extraction.
class NgramFeatureSet {
 public:
  NgramFeatureSet() = default;
  NgramFeatureSet(std::vector<FeatureTemplate> templates, FeatureSetOptions opts = {},
                  std::vector<int> word_classes = {});

  void index(const std::vector<Config>& corpus);
  void index_sentence(std::span<const int> sentence);
  std::size_t size() const { return keys_.size(); }
  const FeatureSetOptions& options() const { return opts_; }
  const std::vector<FeatureTemplate>& templates() const { return templates_; }

  // Counts sorted by feature index, one entry per active feature.
  SparseFeatures extract(std::span<const int> sentence) const;
  void extract(std::span<const int> sentence, SparseFeatures& out) const;

  // Index of the feature (template, values...) or -1.
  long find(std::size_t template_id, const std::vector<int>& values) const;
  // e.g. "w2[Tom likes]".
  std::string describe(std::size_t feature, const Vocab* vocab = nullptr) const;

 private:
  template <class F>
  void for_each_instance(std::span<const int> sentence, F&& f) const;

  std::vector<FeatureTemplate> templates_;
  FeatureSetOptions opts_;
  std::vector<int> classes_;
  std::map<std::vector<int>, std::size_t> index_;  // key = (template, values...)
  std::vector<std::vector<int>> keys_;
};

}  // namespace ebm
