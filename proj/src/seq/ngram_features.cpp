// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ebm/seq/ngram_features.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "ebm/error.hpp"
#include "ebm/seq/vocab.hpp"

namespace ebm {

namespace {

FeatureTemplate make(std::string name, std::vector<int> offsets, bool cls, bool last_word = false) {
  FeatureTemplate t{std::move(name), {}};
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    const bool is_last = i + 1 == offsets.size();
    t.slots.push_back({offsets[i], offsets[i], cls && !(is_last && last_word)});
  }
  return t;
}

}  // namespace

std::vector<FeatureTemplate> feature_templates(std::string_view code, int order) {
  std::vector<FeatureTemplate> out;
  if (code == "w" || code == "c") {
    if (order < 1) throw InvalidArgument("feature_templates: order must be >= 1");
    const bool cls = code == "c";
    for (int n = 1; n <= order; ++n) {
      std::vector<int> offs;
      for (int k = n - 1; k >= 0; --k) offs.push_back(-k);
      out.push_back(make(std::string(code) + std::to_string(n), offs, cls));
    }
  } else if (code == "ws" || code == "cs") {
    const bool cls = code == "cs";
    const std::string p(code);
    out.push_back(make(p + "[-3,0]", {-3, 0}, cls));
    out.push_back(make(p + "[-3,-2,0]", {-3, -2, 0}, cls));
    out.push_back(make(p + "[-3,-1,0]", {-3, -1, 0}, cls));
    out.push_back(make(p + "[-2,0]", {-2, 0}, cls));
  } else if (code == "wsh" || code == "csh") {
    const bool cls = code == "csh";
    const std::string p(code);
    out.push_back(make(p + "[-4,0]", {-4, 0}, cls));
    out.push_back(make(p + "[-5,0]", {-5, 0}, cls));
  } else if (code == "cpw") {
    out.push_back(make("cpw3", {-3, -2, -1, 0}, true, true));
    out.push_back(make("cpw2", {-2, -1, 0}, true, true));
    out.push_back(make("cpw1", {-1, 0}, true, true));
  } else if (code == "tied") {
    out.push_back({"tied.c", {{-9, -6, true}, {0, 0, true}}});
    out.push_back({"tied.w", {{-9, -6, false}, {0, 0, false}}});
  } else {
    throw InvalidArgument("feature_templates: unknown code '" + std::string(code) + "'");
  }
  return out;
}

std::vector<int> exchange_word_classes(const std::vector<Config>& corpus, int vocab_size,
                                       int num_classes, int max_passes) {
  if (num_classes < 1) throw InvalidArgument("exchange_word_classes: need at least one class");
  // Word bigram counts with <s> and </s>, which keep their own classes.
  std::vector<double> freq(static_cast<std::size_t>(vocab_size), 0.0);
  std::map<std::pair<int, int>, double> bigrams;
  for (const auto& s : corpus) {
    int prev = kBos;
    for (int w : s) {
      if (w < 0 || w >= vocab_size) throw InvalidArgument("exchange_word_classes: token out of range");
      freq[std::size_t(w)] += 1;
      bigrams[{prev, w}] += 1;
      prev = w;
    }
    bigrams[{prev, kEos}] += 1;
  }
  // Initial assignment: frequency rank modulo the class count.
  std::vector<int> order(static_cast<std::size_t>(vocab_size));
  for (int i = 0; i < vocab_size; ++i) order[std::size_t(i)] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return freq[std::size_t(a)] > freq[std::size_t(b)]; });
  std::vector<int> cls(static_cast<std::size_t>(vocab_size));
  for (int r = 0; r < vocab_size; ++r) cls[std::size_t(order[std::size_t(r)])] = r % num_classes;

  const int nc = num_classes + 2;  // boundary classes last
  auto class_of = [&](int w) { return w == kBos ? num_classes : w == kEos ? num_classes + 1 : cls[std::size_t(w)]; };
  auto loglik = [&]() {
    std::vector<double> cb(std::size_t(nc * nc), 0.0), left(std::size_t(nc), 0.0), right(std::size_t(nc), 0.0);
    for (const auto& [k, n] : bigrams) {
      const int a = class_of(k.first), b = class_of(k.second);
      cb[std::size_t(a * nc + b)] += n;
      left[std::size_t(a)] += n;
      right[std::size_t(b)] += n;
    }
    double ll = 0;
    for (double n : cb) if (n > 0) ll += n * std::log(n);
    for (double n : left) if (n > 0) ll -= n * std::log(n);
    for (double n : right) if (n > 0) ll -= n * std::log(n);
    return ll;
  };
  double best = loglik();
  for (int pass = 0; pass < max_passes; ++pass) {
    bool changed = false;
    for (int w : order) {
      const int orig = cls[std::size_t(w)];
      int best_c = orig;
      for (int c = 0; c < num_classes; ++c) {
        if (c == orig) continue;
        cls[std::size_t(w)] = c;
        const double ll = loglik();
        if (ll > best + 1e-9) best = ll, best_c = c;
      }
      cls[std::size_t(w)] = best_c;
      changed |= best_c != orig;
    }
    if (!changed) break;
  }
  return cls;
}

NgramFeatureSet::NgramFeatureSet(std::vector<FeatureTemplate> templates, FeatureSetOptions opts,
                                 std::vector<int> word_classes)
    : templates_(std::move(templates)), opts_(opts), classes_(std::move(word_classes)) {
  for (const auto& t : templates_) {
    if (t.slots.empty()) throw InvalidArgument("feature template '" + t.name + "' has no slots");
    for (const auto& s : t.slots) {
      if (s.lo > s.hi || s.hi > 0) throw InvalidArgument("feature template '" + t.name + "': bad offsets");
      if (s.use_class && classes_.empty())
        throw InvalidArgument("feature template '" + t.name + "' needs word classes");
    }
  }
}

template <class F>
void NgramFeatureSet::for_each_instance(std::span<const int> sentence, F&& f) const {
  std::vector<int> padded;
  padded.reserve(sentence.size() + 2);
  if (opts_.bos) padded.push_back(kBos);
  padded.insert(padded.end(), sentence.begin(), sentence.end());
  if (opts_.eos) padded.push_back(kEos);
  const long start = opts_.bos ? 1 : 0;
  auto value = [&](long pos, bool cls) {
    const int w = padded[std::size_t(pos)];
    if (!cls || w < 0) return w;
    if (std::size_t(w) >= classes_.size()) throw InvalidArgument("ngram features: word has no class");
    return classes_[std::size_t(w)];
  };
  std::vector<int> key;
  for (long p = start; p < long(padded.size()); ++p) {
    for (std::size_t tid = 0; tid < templates_.size(); ++tid) {
      const auto& slots = templates_[tid].slots;
      key.assign(1 + slots.size(), 0);
      key[0] = int(tid);
      // Depth-first over tied ranges; untied slots have a single offset.
      auto rec = [&](auto&& self, std::size_t i) -> void {
        if (i == slots.size()) {
          f(key);
          return;
        }
        for (int o = slots[i].lo; o <= slots[i].hi; ++o) {
          const long q = p + o;
          if (q < 0) continue;
          key[i + 1] = value(q, slots[i].use_class);
          self(self, i + 1);
        }
      };
      rec(rec, 0);
    }
  }
}

void NgramFeatureSet::index_sentence(std::span<const int> sentence) {
  for_each_instance(sentence, [&](const std::vector<int>& key) {
    if (index_.emplace(key, keys_.size()).second) keys_.push_back(key);
  });
}

void NgramFeatureSet::index(const std::vector<Config>& corpus) {
  for (const auto& s : corpus) index_sentence(s);
}

void NgramFeatureSet::extract(std::span<const int> sentence, SparseFeatures& out) const {
  out.clear();
  for_each_instance(sentence, [&](const std::vector<int>& key) {
    auto it = index_.find(key);
    if (it != index_.end()) out.push_back({it->second, 1.0});
  });
  std::sort(out.begin(), out.end());
  std::size_t w = 0;
  for (std::size_t r = 0; r < out.size(); ++r) {
    if (w > 0 && out[w - 1].first == out[r].first) {
      out[w - 1].second += 1.0;
    } else {
      out[w++] = out[r];
    }
  }
  out.resize(w);
}

SparseFeatures NgramFeatureSet::extract(std::span<const int> sentence) const {
  SparseFeatures out;
  extract(sentence, out);
  return out;
}

long NgramFeatureSet::find(std::size_t template_id, const std::vector<int>& values) const {
  std::vector<int> key{int(template_id)};
  key.insert(key.end(), values.begin(), values.end());
  auto it = index_.find(key);
  return it == index_.end() ? -1 : long(it->second);
}

std::string NgramFeatureSet::describe(std::size_t feature, const Vocab* vocab) const {
  if (feature >= keys_.size()) throw InvalidArgument("describe: feature index out of range");
  const auto& key = keys_[feature];
  const auto& t = templates_[std::size_t(key[0])];
  std::string out = t.name + "[";
  for (std::size_t i = 1; i < key.size(); ++i) {
    if (i > 1) out += ' ';
    const int v = key[i];
    if (v == kBos) out += "<s>";
    else if (v == kEos) out += "</s>";
    else if (t.slots[i - 1].use_class) out += "c" + std::to_string(v);
    else out += vocab ? vocab->token(v) : std::to_string(v);
  }
  return out + "]";
}

}  // namespace ebm
