// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ebm/seq/residual.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ebm/error.hpp"
#include "ebm/numeric.hpp"

namespace ebm {

ResidualElm::ResidualElm(const NgramAlm& reference, int length, NgramFeatureSet features)
    : ref_(reference), length_(length), features_(std::move(features)) {
  if (length < 1) throw InvalidArgument("ResidualElm: length must be >= 1");
  params_.add_block("lambda", features_.size());
}

void ResidualElm::check(std::span<const int> x) const {
  if (int(x.size()) != length_)
    throw InvalidArgument("ResidualElm: expected length " + std::to_string(length_) + ", got " +
                          std::to_string(x.size()));
}

double ResidualElm::energy(std::span<const int> x) const {
  const auto lambda = params_.block("lambda");
  double e = 0;
  for (const auto& [i, c] : features_.extract(x)) e -= lambda[i] * c;
  return e;
}

void ResidualElm::add_energy_grad(std::span<const int> x, double scale, std::span<double> grad) const {
  const std::size_t off = params_.info("lambda").offset;
  for (const auto& [i, c] : features_.extract(x)) grad[off + i] -= scale * c;
}

double ResidualElm::potential(std::span<const int> x) const {
  check(x);
  return ref_.log_prob_fixed_length(x) - energy(x);
}

void ResidualElm::add_potential_grad(std::span<const int> x, double scale, std::span<double> grad) const {
  check(x);
  add_energy_grad(x, -scale, grad);
}

std::vector<double> ResidualElm::reference_next(std::span<const int> prefix) const {
  return ref_.next_probs_no_eos(prefix);
}

double ResidualElm::exact_log_z(std::span<const int> prefix) const {
  if (int(prefix.size()) > length_) throw InvalidArgument("exact_log_z: prefix longer than the model");
  // Depth-first over continuations, carrying log q of the partial path.
  LogSumExp acc;
  Config x(prefix.begin(), prefix.end());
  auto rec = [&](auto&& self, double lq) -> void {
    if (int(x.size()) == length_) {
      acc.add(lq - energy(x));
      return;
    }
    const auto p = reference_next(x);
    for (int w = 0; w < int(p.size()); ++w) {
      x.push_back(w);
      self(self, lq + std::log(p[std::size_t(w)]));
      x.pop_back();
    }
  };
  rec(rec, 0.0);
  return acc.value();
}

double ResidualElm::exact_step_log_prob(std::span<const int> prefix, int token) const {
  Config next(prefix.begin(), prefix.end());
  next.push_back(token);
  return std::log(reference_next(prefix)[std::size_t(token)]) + exact_log_z(next) - exact_log_z(prefix);
}

Config topk_reference_sample(const ResidualElm& model, std::span<const int> prefix, int k, Rng& rng) {
  if (k < 1) throw InvalidArgument("top-k sampling: k must be >= 1");
  if (int(prefix.size()) > model.length()) throw InvalidArgument("top-k sampling: prefix longer than the model");
  Config x(prefix.begin(), prefix.end());
  std::vector<int> order;
  while (int(x.size()) < model.length()) {
    auto p = model.reference_next(x);
    if (k < int(p.size())) {
      order.resize(p.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](int a, int b) { return p[std::size_t(a)] > p[std::size_t(b)]; });
      for (std::size_t r = std::size_t(k); r < order.size(); ++r) p[std::size_t(order[r])] = 0.0;
    }
    x.push_back(int(rng.categorical(p)));
  }
  return x;
}

TopkSample residual_topk_sample(const ResidualElm& model, std::span<const int> prefix, std::size_t n,
                                int k, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("residual_topk_sample: n must be >= 1");
  Rng rng(seed);
  TopkSample out;
  std::vector<double> lw;
  for (std::size_t i = 0; i < n; ++i) {
    out.proposals.push_back(topk_reference_sample(model, prefix, k, rng));
    lw.push_back(-model.energy(out.proposals.back()));
  }
  if (*std::max_element(lw.begin(), lw.end()) == kNegInf)
    throw InvalidArgument("residual_topk_sample: every proposal has infinite energy");
  out.chosen = rng.categorical_log(lw);
  out.sentence = out.proposals[out.chosen];
  return out;
}

PartitionPair partition_pair(std::span<const double> energies) {
  const std::size_t n = energies.size();
  if (n < 2) throw InvalidArgument("partition_pair: need at least two samples");
  double m = kNegInf;
  for (double e : energies) m = std::max(m, -e);
  if (m == kNegInf) return {kNegInf, kNegInf};
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = std::exp(-energies[i] - m);
  // Leave-one-out sums from prefix and suffix sums avoid cancellation when
  // one weight dominates.
  std::vector<double> suffix(n + 1, 0.0);
  for (std::size_t i = n; i-- > 0;) suffix[i] = suffix[i + 1] + w[i];
  const double tn = m + std::log(suffix[0] / double(n));
  double prefix = 0, tn1 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    tn1 += (m + std::log((prefix + suffix[i + 1]) / double(n - 1))) / double(n);
    prefix += w[i];
  }
  return {tn, double(2 * n - 1) * tn - double(2 * (n - 1)) * tn1};
}

namespace {

std::vector<double> continuation_energies(const ResidualElm& model, std::span<const int> prefix,
                                          std::size_t n, Rng& rng) {
  std::vector<double> e(n);
  for (auto& v : e) v = model.energy(model.reference().sample_fixed_length(rng, std::size_t(model.length()), prefix));
  return e;
}

}  // namespace

PartitionBounds partition_bounds(const ResidualElm& model, std::size_t n, std::size_t repeats,
                                 std::uint64_t seed, std::span<const int> prefix) {
  if (n < 2) throw InvalidArgument("partition_bounds: n must be >= 2");
  if (repeats < 2) throw InvalidArgument("partition_bounds: need at least two repeats");
  std::vector<double> lo(repeats), up(repeats);
  for (std::size_t r = 0; r < repeats; ++r) {
    Rng rng(seed, r);
    const auto p = partition_pair(continuation_energies(model, prefix, n, rng));
    lo[r] = p.lower, up[r] = p.upper;
  }
  auto mean_se = [&](const std::vector<double>& v, double& mean, double& se) {
    mean = std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
    double ss = 0;
    for (double x : v) ss += (x - mean) * (x - mean);
    se = std::sqrt(ss / double(v.size() - 1) / double(v.size()));
  };
  PartitionBounds b;
  b.repeats = repeats;
  mean_se(lo, b.lower_mean, b.lower_se);
  mean_se(up, b.upper_mean, b.upper_se);
  return b;
}

StepBounds stepwise_prob(const ResidualElm& model, std::span<const int> prefix, int token,
                         std::size_t mc_samples, std::uint64_t seed, const StepwiseOptions& opts) {
  if (int(prefix.size()) >= model.length()) throw InvalidArgument("stepwise_prob: prefix fills the sequence");
  const auto q = model.reference_next(prefix);
  if (token < 0 || token >= int(q.size())) throw InvalidArgument("stepwise_prob: token out of range");
  Config next(prefix.begin(), prefix.end());
  next.push_back(token);
  if (int(next.size()) == model.length()) {
    const double v = model.exact_step_log_prob(prefix, token);
    return {v, v, true};
  }
  const std::size_t g = opts.groups;
  if (g < 2 || mc_samples < 2 * g)
    throw InvalidArgument("stepwise_prob: need at least two groups of two samples");
  const std::size_t per = mc_samples / g;
  Rng rng(seed);
  // Per group: lower = T(num) - U(den), upper = U(num) - T(den).
  std::vector<double> lo(g), up(g);
  for (std::size_t i = 0; i < g; ++i) {
    const auto num = partition_pair(continuation_energies(model, next, per, rng));
    const auto den = partition_pair(continuation_energies(model, prefix, per, rng));
    lo[i] = num.lower - den.upper;
    up[i] = num.upper - den.lower;
  }
  auto mean_se = [&](const std::vector<double>& v) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
    double ss = 0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::pair{mean, std::sqrt(ss / double(v.size() - 1) / double(v.size()))};
  };
  const auto [lm, ls] = mean_se(lo);
  const auto [um, us] = mean_se(up);
  const double log_q = std::log(q[std::size_t(token)]);
  return {log_q + lm - opts.sigmas * ls, log_q + um + opts.sigmas * us, false};
}

}  // namespace ebm
