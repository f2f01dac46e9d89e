// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ebm/seq/label_bias.hpp"

#include <map>
#include <ostream>
#include <set>

#include "ebm/error.hpp"
#include "ebm/oracle.hpp"
#include "ebm/seq/ngram_features.hpp"
#include "ebm/seq/trf.hpp"
#include "ebm/seq/vocab.hpp"

namespace ebm {

namespace {

// Bigram ALM whose unseen successors are the words seen at the same sentence
// position after some other history. They share mass epsilon; seen
// successors split the rest by count. Histories without unseen candidates
// keep their maximum-likelihood estimates.
class PositionSmoothedBigram {
 public:
  PositionSmoothedBigram(const std::vector<Config>& corpus, double eps) : eps_(eps) {
    for (const auto& s : corpus) {
      int prev = kBos;
      for (std::size_t t = 0; t <= s.size(); ++t) {
        const int w = t < s.size() ? s[t] : kEos;
        counts_[prev][w] += 1;
        totals_[prev] += 1;
        slot_[int(t)].insert(w);
        pos_of_[prev] = int(t);
        prev = w;
      }
    }
  }

  double prob(int prev, int w) const {
    const auto& seen = counts_.at(prev);
    const auto& cand = slot_.at(pos_of_.at(prev));
    std::size_t unseen = 0;
    for (int c : cand) unseen += seen.count(c) == 0;
    auto it = seen.find(w);
    if (it != seen.end()) return (unseen ? 1 - eps_ : 1.0) * it->second / totals_.at(prev);
    return cand.count(w) ? eps_ / double(unseen) : 0.0;
  }

  double sentence_prob(const Config& s) const {
    double p = 1;
    int prev = kBos;
    for (std::size_t t = 0; t <= s.size(); ++t) {
      const int w = t < s.size() ? s[t] : kEos;
      p *= prob(prev, w);
      prev = w;
    }
    return p;
  }

 private:
  double eps_;
  std::map<int, std::map<int, double>> counts_;
  std::map<int, double> totals_;
  std::map<int, std::set<int>> slot_;
  std::map<int, int> pos_of_;
};

}  // namespace

LabelBiasReport label_bias_demo(const LabelBiasConfig& cfg) {
  if (!(cfg.epsilon > 0 && cfg.epsilon < 1)) throw InvalidArgument("label_bias_demo: epsilon must lie in (0, 1)");
  Vocab vocab;
  const auto train = parse_sentences({"Tom likes tea", "John likes tea", "Alice like tea"}, vocab, true);
  const auto test = parse_sentences({"Alice likes tea", "Tom like tea"}, vocab, true);

  LabelBiasReport r;
  r.epsilon = cfg.epsilon;
  r.steps = cfg.steps;
  r.l2 = cfg.l2;
  PositionSmoothedBigram alm(train, cfg.epsilon);
  r.alm_alice_likes_tea = alm.sentence_prob(test[0]);
  r.alm_tom_like_tea = alm.sentence_prob(test[1]);

  // Observed bigrams with both boundaries give exactly the nine indicators.
  NgramFeatureSet feats({{"w2", {{-1, -1, false}, {0, 0, false}}}}, {true, true});
  feats.index(train);
  GnElm elm(SequencePotential(feats, vocab.size()), 3);
  const auto space = DiscreteSpace::product_values(
      {{vocab.id("Tom"), vocab.id("John"), vocab.id("Alice")}, {vocab.id("likes"), vocab.id("like")}, {vocab.id("tea")}});

  std::vector<double> data_mean(elm.num_params(), 0.0);
  for (const auto& s : train) elm.add_potential_grad(s, 1.0 / double(train.size()), data_mean);
  auto theta = elm.params().values();
  for (int step = 0; step < cfg.steps; ++step) {
    const auto model_mean = enumerate_grad_log_z(elm, space);
    for (std::size_t i = 0; i < theta.size(); ++i)
      theta[i] += cfg.lr * (data_mean[i] - model_mean[i] - cfg.l2 * theta[i]);
  }
  r.log_z = enumerate_log_z(elm, space);
  r.elm_alice_likes_tea = elm.potential(test[0]) - r.log_z;
  r.elm_tom_like_tea = elm.potential(test[1]) - r.log_z;
  for (std::size_t i = 0; i < feats.size(); ++i) {
    r.feature_names.push_back(feats.describe(i, &vocab));
    r.lambda.push_back(theta[i]);
  }
  return r;
}

void write_label_bias_report(std::ostream& out, const LabelBiasReport& r) {
  out << "label-bias worked example\n";
  out << "bigram ALM (epsilon=" << r.epsilon << ")\n";
  out << "  P(Alice likes tea) = " << r.alm_alice_likes_tea << "\n";
  out << "  P(Tom like tea)    = " << r.alm_tom_like_tea << "\n";
  out << "  tie: " << (r.alm_alice_likes_tea == r.alm_tom_like_tea ? "exact" : "NO") << "\n";
  out << "GN-ELM (" << r.steps << " exact-gradient steps, l2=" << r.l2 << ")\n";
  for (std::size_t i = 0; i < r.lambda.size(); ++i)
    out << "  lambda " << r.feature_names[i] << " = " << r.lambda[i] << "\n";
  out << "  log P(Alice likes tea) = " << r.elm_alice_likes_tea << "  (published " << kPublishedAliceLikesTea << ")\n";
  out << "  log P(Tom like tea)    = " << r.elm_tom_like_tea << "  (published " << kPublishedTomLikeTea << ")\n";
  out << "  log Z                  = " << r.log_z << "  (published " << kPublishedLogZ << ")\n";
  out << "  ordering: " << (r.elm_alice_likes_tea > r.elm_tom_like_tea ? "Alice likes tea ranked higher" : "NOT ranked higher")
      << "\n";
}

}  // namespace ebm
