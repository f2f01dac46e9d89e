// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ebm/seq/ctc.hpp"

#include <algorithm>
#include <cmath>

#include "ebm/error.hpp"

namespace ebm {

std::vector<int> ctc_collapse(std::span<const int> path, int blank) {
  std::vector<int> out;
  int prev = -1;
  for (int s : path) {
    if (s != prev && s != blank) out.push_back(s);
    prev = s;
  }
  return out;
}

namespace {

void check_labels(std::span<const int> labels, int k) {
  for (int l : labels)
    if (l < 0 || l >= k) throw InvalidArgument("ctc: label out of range (the blank is not a label)");
}

Matrix row_log_softmax(const Matrix& logits) {
  Matrix out(logits.rows, logits.cols);
  for (std::size_t t = 0; t < logits.rows; ++t) {
    const auto r = log_softmax(logits.row(t));
    std::copy(r.begin(), r.end(), out.row(t).begin());
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

CtcLattice::CtcLattice(std::vector<int> labels, int num_labels)
    : labels_(std::move(labels)), num_labels_(num_labels) {
  if (num_labels < 1) throw InvalidArgument("CtcLattice: need at least one label");
  check_labels(labels_, num_labels);
}

int CtcLattice::symbol(std::size_t state) const {
  return state % 2 == 0 ? num_labels_ : labels_[(state - 1) / 2];
}

bool CtcLattice::can_skip_to(std::size_t state) const {
  return state % 2 == 1 && state >= 3 && labels_[(state - 1) / 2] != labels_[(state - 3) / 2];
}

std::size_t CtcLattice::min_frames() const {
  std::size_t n = labels_.size();
  for (std::size_t i = 1; i < labels_.size(); ++i) n += labels_[i] == labels_[i - 1];
  return n;
}

PathOccupancy CtcLattice::forward_backward(const Matrix& phi) const {
  if (phi.cols != std::size_t(num_labels_ + 1)) throw ShapeMismatch("CtcLattice: phi must have K + 1 columns");
  if (phi.rows == 0) throw InvalidArgument("CtcLattice: no frames");
  const std::size_t T = phi.rows, S = num_states();
  PathOccupancy out;
  out.post = Matrix(T, phi.cols);
  if (T < min_frames()) return out;

  Matrix alpha(T, S, kNegInf), beta(T, S, kNegInf);
  alpha(0, 0) = phi(0, std::size_t(symbol(0)));
  if (S > 1) alpha(0, 1) = phi(0, std::size_t(symbol(1)));
  for (std::size_t t = 1; t < T; ++t)
    for (std::size_t s = 0; s < S; ++s) {
      double a = alpha(t - 1, s);
      if (s >= 1) a = log_add(a, alpha(t - 1, s - 1));
      if (can_skip_to(s)) a = log_add(a, alpha(t - 1, s - 2));
      if (a != kNegInf) alpha(t, s) = a + phi(t, std::size_t(symbol(s)));
    }
  beta(T - 1, S - 1) = 0;
  if (S > 1) beta(T - 1, S - 2) = 0;
  for (std::size_t t = T - 1; t-- > 0;)
    for (std::size_t s = 0; s < S; ++s) {
      double b = beta(t + 1, s) + phi(t + 1, std::size_t(symbol(s)));
      if (s + 1 < S) b = log_add(b, beta(t + 1, s + 1) + phi(t + 1, std::size_t(symbol(s + 1))));
      if (s + 2 < S && can_skip_to(s + 2))
        b = log_add(b, beta(t + 1, s + 2) + phi(t + 1, std::size_t(symbol(s + 2))));
      beta(t, s) = b;
    }
  out.log_sum = alpha(T - 1, S - 1);
  if (S > 1) out.log_sum = log_add(out.log_sum, alpha(T - 1, S - 2));
  if (out.log_sum == kNegInf) return out;
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t s = 0; s < S; ++s) {
      const double v = alpha(t, s) + beta(t, s);
      if (v != kNegInf) out.post(t, std::size_t(symbol(s))) += std::exp(v - out.log_sum);
    }
  return out;
}

CtcResult ctc_loss_grad(const Matrix& logits, std::span<const int> labels) {
  if (logits.cols < 2) throw ShapeMismatch("ctc_loss_grad: need at least one label plus the blank");
  const int K = int(logits.cols) - 1;
  CtcLattice lattice({labels.begin(), labels.end()}, K);
  CtcResult out;
  out.grad = Matrix(logits.rows, logits.cols);
  const auto lp = row_log_softmax(logits);
  const auto occ = lattice.forward_backward(lp);
  if (occ.log_sum == kNegInf) return out;  // infeasible: +inf loss, zero gradient
  out.feasible = true;
  out.loss = -occ.log_sum;
  for (std::size_t i = 0; i < lp.data.size(); ++i) out.grad.data[i] = std::exp(lp.data[i]) - occ.post.data[i];
  return out;
}

std::vector<int> ctc_greedy_decode(const Matrix& logits) {
  std::vector<int> path;
  for (std::size_t t = 0; t < logits.rows; ++t) {
    const auto r = logits.row(t);
    path.push_back(int(std::max_element(r.begin(), r.end()) - r.begin()));
  }
  return ctc_collapse(path, int(logits.cols) - 1);
}

// ---------------------------------------------------------------------------

LabelLm::LabelLm(int num_labels, int order) : k_(num_labels), order_(order) {
  if (num_labels < 1) throw InvalidArgument("LabelLm: need at least one label");
  if (order < 1) throw InvalidArgument("LabelLm: order must be at least 1");
}

LabelLm LabelLm::flat(int num_labels, int order) {
  LabelLm lm(num_labels, order);
  lm.flat_ = true;
  return lm;
}

void LabelLm::fit(const std::vector<std::vector<int>>& transcripts) {
  counts_.clear();
  const auto h = std::size_t(order_ - 1);
  for (const auto& y : transcripts) {
    check_labels(y, k_);
    std::vector<int> padded(h, kStart);
    padded.insert(padded.end(), y.begin(), y.end());
    padded.push_back(k_);
    for (std::size_t i = h; i < padded.size(); ++i) {
      std::vector<int> key(padded.begin() + std::ptrdiff_t(i - h), padded.begin() + std::ptrdiff_t(i));
      auto& c = counts_[key];
      if (c.empty()) c.assign(std::size_t(k_ + 2), 0.0);  // last slot: total
      c[std::size_t(padded[i])] += 1;
      c.back() += 1;
    }
  }
}

double LabelLm::log_prob(std::span<const int> history, int next) const {
  if (history.size() != std::size_t(order_ - 1)) throw ShapeMismatch("LabelLm: history length must be order - 1");
  if (next < 0 || next > k_) throw InvalidArgument("LabelLm: symbol out of range");
  if (flat_) return 0.0;
  const auto it = counts_.find(std::vector<int>(history.begin(), history.end()));
  if (it == counts_.end()) return -std::log(double(k_ + 1));
  return std::log((it->second[std::size_t(next)] + 1) / (it->second.back() + k_ + 1));
}

double LabelLm::sequence_log_prob(std::span<const int> labels) const {
  check_labels(labels, k_);
  std::vector<int> hist(std::size_t(order_ - 1), kStart);
  double lp = 0;
  auto push = [&](int s) {
    lp += log_prob(hist, s);
    if (!hist.empty()) {
      hist.erase(hist.begin());
      hist.push_back(s);
    }
  };
  for (int l : labels) push(l);
  push(k_);
  return lp;
}

// ---------------------------------------------------------------------------

DenominatorGraph::DenominatorGraph(LabelLm lm) : lm_(std::move(lm)) {
  const int K = lm_.num_labels();
  using Key = std::pair<std::vector<int>, int>;  // (history, last frame label or -1)
  std::map<Key, std::size_t> index;
  std::vector<Key> keys;
  auto intern = [&](const Key& key) {
    auto [it, fresh] = index.emplace(key, keys.size());
    if (fresh) keys.push_back(key);
    return it->second;
  };
  intern({std::vector<int>(std::size_t(lm_.order() - 1), LabelLm::kStart), -1});
  for (std::size_t s = 0; s < keys.size(); ++s) {
    const Key key = keys[s];
    std::vector<std::size_t> nx(std::size_t(K + 1));
    std::vector<double> w(std::size_t(K + 1), 0.0);
    for (int k = 0; k <= K; ++k) {
      if (k == K) {
        nx[std::size_t(k)] = intern({key.first, -1});
      } else if (k == key.second) {
        nx[std::size_t(k)] = s;
      } else {
        w[std::size_t(k)] = lm_.log_prob(key.first, k);
        auto hist = key.first;
        if (!hist.empty()) {
          hist.erase(hist.begin());
          hist.push_back(k);
        }
        nx[std::size_t(k)] = intern({hist, k});
      }
    }
    next_.push_back(std::move(nx));
    weight_.push_back(std::move(w));
    final_.push_back(lm_.log_prob(key.first, K));
  }
}

std::size_t DenominatorGraph::state_bound(int num_labels, int order) {
  if (order <= 1) return std::size_t(num_labels + 1);
  std::size_t sum = 0, p = 1;
  for (int j = 0; j < order; ++j, p *= std::size_t(num_labels)) sum += p;
  return 2 * sum;
}

double DenominatorGraph::path_weight(std::span<const int> path) const {
  std::size_t s = kStartState;
  double w = 0;
  for (int k : path) {
    if (k < 0 || k >= num_symbols()) throw InvalidArgument("DenominatorGraph: symbol out of range");
    w += arc_weight(s, k);
    s = next(s, k);
  }
  return w + final_weight(s);
}

PathOccupancy DenominatorGraph::forward_backward(const Matrix& phi) const {
  if (phi.cols != std::size_t(num_symbols())) throw ShapeMismatch("DenominatorGraph: phi must have K + 1 columns");
  if (phi.rows == 0) throw InvalidArgument("DenominatorGraph: no frames");
  const std::size_t T = phi.rows, S = num_states(), A = std::size_t(num_symbols());
  // alpha[t] holds states after consuming frames 0..t-1; alpha[0] is the start.
  std::vector<std::vector<double>> alpha(T + 1, std::vector<double>(S, kNegInf));
  std::vector<std::vector<double>> beta(T + 1, std::vector<double>(S, kNegInf));
  alpha[0][kStartState] = 0;
  for (std::size_t t = 0; t < T; ++t) {
    std::vector<LogSumExp> acc(S);
    for (std::size_t s = 0; s < S; ++s) {
      if (alpha[t][s] == kNegInf) continue;
      for (std::size_t k = 0; k < A; ++k) acc[next_[s][k]].add(alpha[t][s] + weight_[s][k] + phi(t, k));
    }
    for (std::size_t s = 0; s < S; ++s) alpha[t + 1][s] = acc[s].value();
  }
  beta[T] = final_;
  for (std::size_t t = T; t-- > 0;)
    for (std::size_t s = 0; s < S; ++s) {
      LogSumExp acc;
      for (std::size_t k = 0; k < A; ++k) acc.add(weight_[s][k] + phi(t, k) + beta[t + 1][next_[s][k]]);
      beta[t][s] = acc.value();
    }
  PathOccupancy out;
  LogSumExp z;
  for (std::size_t s = 0; s < S; ++s) z.add(alpha[T][s] + final_[s]);
  out.log_sum = z.value();
  out.post = Matrix(T, A);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t s = 0; s < S; ++s) {
      if (alpha[t][s] == kNegInf) continue;
      for (std::size_t k = 0; k < A; ++k)
        out.post(t, k) +=
            std::exp(alpha[t][s] + weight_[s][k] + phi(t, k) + beta[t + 1][next_[s][k]] - out.log_sum);
    }
  return out;
}

std::vector<int> DenominatorGraph::best_path(const Matrix& phi) const {
  if (phi.cols != std::size_t(num_symbols())) throw ShapeMismatch("DenominatorGraph: phi must have K + 1 columns");
  const std::size_t T = phi.rows, S = num_states(), A = std::size_t(num_symbols());
  std::vector<std::vector<double>> score(T + 1, std::vector<double>(S, kNegInf));
  std::vector<std::vector<std::pair<std::size_t, int>>> from(T + 1, std::vector<std::pair<std::size_t, int>>(S));
  score[0][kStartState] = 0;
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t s = 0; s < S; ++s) {
      if (score[t][s] == kNegInf) continue;
      for (std::size_t k = 0; k < A; ++k) {
        const double v = score[t][s] + weight_[s][k] + phi(t, k);
        auto& dst = score[t + 1][next_[s][k]];
        if (v > dst) dst = v, from[t + 1][next_[s][k]] = {s, int(k)};
      }
    }
  std::size_t best = 0;
  double m = kNegInf;
  for (std::size_t s = 0; s < S; ++s)
    if (score[T][s] + final_[s] > m) m = score[T][s] + final_[s], best = s;
  std::vector<int> path(T);
  for (std::size_t t = T; t > 0; --t) {
    path[t - 1] = from[t][best].second;
    best = from[t][best].first;
  }
  return path;
}

CtcCrfResult ctc_crf_loss_grad(const Matrix& phi, std::span<const int> labels,
                               const DenominatorGraph& graph) {
  const int K = graph.lm().num_labels();
  CtcLattice lattice({labels.begin(), labels.end()}, K);
  CtcCrfResult out;
  out.grad = Matrix(phi.rows, phi.cols);
  const auto num = lattice.forward_backward(phi);
  if (num.log_sum == kNegInf) return out;
  const auto den = graph.forward_backward(phi);
  out.feasible = true;
  out.log_numerator = graph.lm().sequence_log_prob(labels) + num.log_sum;
  out.log_denominator = den.log_sum;
  out.loss = out.log_denominator - out.log_numerator;
  for (std::size_t i = 0; i < out.grad.data.size(); ++i) out.grad.data[i] = den.post.data[i] - num.post.data[i];
  return out;
}

// ---------------------------------------------------------------------------

CtcPathModel::CtcPathModel(Matrix logits) : logits_(std::move(logits)), log_probs_(row_log_softmax(logits_)) {
  if (logits_.cols < 2 || logits_.rows == 0) throw ShapeMismatch("CtcPathModel: need T >= 1 and K + 1 >= 2");
}

DiscreteSpace CtcPathModel::latent_space(std::span<const int>) const {
  return DiscreteSpace::product(std::vector<int>(logits_.rows, int(logits_.cols)));
}

double CtcPathModel::log_joint(std::span<const int> x, std::span<const int> h) const {
  const auto y = ctc_collapse(h, int(logits_.cols) - 1);
  if (!std::equal(y.begin(), y.end(), x.begin(), x.end())) return kNegInf;
  double s = 0;
  for (std::size_t t = 0; t < h.size(); ++t) s += log_probs_(t, std::size_t(h[t]));
  return s;
}

void CtcPathModel::add_log_joint_grad(std::span<const int>, std::span<const int> h, double scale,
                                      std::span<double> grad) const {
  for (std::size_t t = 0; t < logits_.rows; ++t)
    for (std::size_t k = 0; k < logits_.cols; ++k)
      grad[t * logits_.cols + k] += scale * ((std::size_t(h[t]) == k) - std::exp(log_probs_(t, k)));
}

std::vector<double> CtcPathModel::log_marginal_grad(std::span<const int> x) const {
  const auto r = ctc_loss_grad(logits_, x);
  if (!r.feasible) throw InvalidArgument("CtcPathModel: labels cannot be emitted in T frames");
  std::vector<double> g(r.grad.data.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = -r.grad.data[i];
  return g;
}

}  // namespace ebm
