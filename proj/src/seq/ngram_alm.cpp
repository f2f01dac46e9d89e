// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ebm/seq/ngram_alm.hpp"

#include <cmath>

#include "ebm/error.hpp"
#include "ebm/seq/vocab.hpp"

namespace ebm {

NgramAlm::NgramAlm(int order, int vocab_size, double discount)
    : order_(order), vocab_(vocab_size), d_(discount), levels_(std::size_t(order)) {
  if (order < 1) throw InvalidArgument("NgramAlm: order must be >= 1");
  if (vocab_size < 1) throw InvalidArgument("NgramAlm: empty vocabulary");
  if (!(discount > 0 && discount < 1)) throw InvalidArgument("NgramAlm: discount must lie in (0, 1)");
}

std::vector<int> NgramAlm::history(std::span<const int> prefix, int k) const {
  std::vector<int> h(std::size_t(k), kBos);
  const long n = long(prefix.size());
  for (int i = 0; i < k; ++i) {
    const long pos = n - k + i;
    if (pos >= 0) h[std::size_t(i)] = prefix[std::size_t(pos)];
  }
  return h;
}

void NgramAlm::fit(const std::vector<Config>& corpus) {
  for (const auto& s : corpus) {
    for (std::size_t t = 0; t <= s.size(); ++t) {
      const int next = t < s.size() ? s[t] : vocab_;
      if (next < 0 || next > vocab_ || (t < s.size() && next == vocab_))
        throw InvalidArgument("NgramAlm::fit: token out of range");
      for (int k = 0; k < order_; ++k) {
        auto& st = levels_[std::size_t(k)][history(std::span(s).first(t), k)];
        st.next[next] += 1;
        st.total += 1;
      }
    }
  }
}

void NgramAlm::probs_into(std::span<const int> prefix, std::vector<double>& out) const {
  const std::size_t m = std::size_t(vocab_) + 1;
  out.assign(m, 1.0 / double(m));
  for (int k = 0; k < order_; ++k) {
    auto it = levels_[std::size_t(k)].find(history(prefix, k));
    if (it == levels_[std::size_t(k)].end() || it->second.total == 0) continue;
    const auto& st = it->second;
    const double backoff = d_ * double(st.next.size()) / st.total;
    for (auto& p : out) p *= backoff;
    for (const auto& [w, c] : st.next) out[std::size_t(w)] += std::max(c - d_, 0.0) / st.total;
  }
}

std::vector<double> NgramAlm::next_probs(std::span<const int> prefix) const {
  std::vector<double> p;
  probs_into(prefix, p);
  return p;
}

std::vector<double> NgramAlm::next_probs_no_eos(std::span<const int> prefix) const {
  auto p = next_probs(prefix);
  const double keep = 1.0 - p.back();
  p.pop_back();
  for (auto& v : p) v /= keep;
  return p;
}

double NgramAlm::log_prob(std::span<const int> sentence) const {
  double lp = 0;
  std::vector<double> p;
  for (std::size_t t = 0; t <= sentence.size(); ++t) {
    probs_into(sentence.first(t), p);
    const int next = t < sentence.size() ? sentence[t] : vocab_;
    if (next < 0 || next > vocab_) throw InvalidArgument("NgramAlm::log_prob: token out of range");
    lp += std::log(p[std::size_t(next)]);
  }
  return lp;
}

double NgramAlm::log_prob_fixed_length(std::span<const int> sentence) const {
  double lp = 0;
  for (std::size_t t = 0; t < sentence.size(); ++t) {
    if (sentence[t] < 0 || sentence[t] >= vocab_) throw InvalidArgument("NgramAlm: token out of range");
    lp += std::log(next_probs_no_eos(sentence.first(t))[std::size_t(sentence[t])]);
  }
  return lp;
}

Config NgramAlm::sample(Rng& rng, std::size_t max_len) const {
  Config s;
  std::vector<double> p;
  while (true) {
    probs_into(s, p);
    const int next = int(rng.categorical(p));
    if (next == vocab_) return s;
    if (s.size() == max_len) throw NumericalError("NgramAlm::sample: no end symbol within max_len");
    s.push_back(next);
  }
}

Config NgramAlm::sample_fixed_length(Rng& rng, std::size_t length, std::span<const int> prefix) const {
  Config s(prefix.begin(), prefix.end());
  while (s.size() < length) s.push_back(int(rng.categorical(next_probs_no_eos(s))));
  return s;
}

}  // namespace ebm
