// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ebm/seq/crf.hpp"

#include <cmath>

#include "ebm/energy_model.hpp"
#include "ebm/error.hpp"
#include "ebm/optim.hpp"

namespace ebm {

namespace {

void check_shapes(const Matrix& phi, const Matrix& trans) {
  if (phi.rows == 0) throw InvalidArgument("chain: empty sequence");
  if (trans.cols != phi.cols || trans.rows != phi.cols + 1)
    throw ShapeMismatch("chain: transitions must be (K + 1) x K");
}

}  // namespace

double chain_score(const Matrix& phi, const Matrix& trans, std::span<const int> y) {
  check_shapes(phi, trans);
  if (y.size() != phi.rows) throw ShapeMismatch("chain_score: label length differs from T");
  const auto K = phi.cols;
  double s = 0;
  std::size_t prev = K;
  for (std::size_t t = 0; t < y.size(); ++t) {
    if (y[t] < 0 || std::size_t(y[t]) >= K) throw InvalidArgument("chain_score: label out of range");
    s += trans(prev, std::size_t(y[t])) + phi(t, std::size_t(y[t]));
    prev = std::size_t(y[t]);
  }
  return s;
}

double chain_log_partition(const Matrix& phi, const Matrix& trans) {
  check_shapes(phi, trans);
  const auto T = phi.rows, K = phi.cols;
  std::vector<double> a(K), next(K);
  for (std::size_t k = 0; k < K; ++k) a[k] = trans(K, k) + phi(0, k);
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t k = 0; k < K; ++k) {
      LogSumExp acc;
      for (std::size_t j = 0; j < K; ++j) acc.add(a[j] + trans(j, k));
      next[k] = acc.value() + phi(t, k);
    }
    a.swap(next);
  }
  return log_sum_exp(a);
}

ChainPosteriors chain_forward_backward(const Matrix& phi, const Matrix& trans) {
  check_shapes(phi, trans);
  const auto T = phi.rows, K = phi.cols;
  ChainPosteriors out;
  out.alpha = Matrix(T, K);
  out.beta = Matrix(T, K, 0.0);
  for (std::size_t k = 0; k < K; ++k) out.alpha(0, k) = trans(K, k) + phi(0, k);
  for (std::size_t t = 1; t < T; ++t)
    for (std::size_t k = 0; k < K; ++k) {
      LogSumExp acc;
      for (std::size_t j = 0; j < K; ++j) acc.add(out.alpha(t - 1, j) + trans(j, k));
      out.alpha(t, k) = acc.value() + phi(t, k);
    }
  for (std::size_t t = T - 1; t-- > 0;)
    for (std::size_t j = 0; j < K; ++j) {
      LogSumExp acc;
      for (std::size_t k = 0; k < K; ++k) acc.add(trans(j, k) + phi(t + 1, k) + out.beta(t + 1, k));
      out.beta(t, j) = acc.value();
    }
  out.log_z = log_sum_exp(out.alpha.row(T - 1));
  LogSumExp back;
  for (std::size_t k = 0; k < K; ++k) back.add(trans(K, k) + phi(0, k) + out.beta(0, k));
  out.log_z_backward = back.value();

  const double lz = out.log_z;
  out.node = Matrix(T, K);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t k = 0; k < K; ++k) out.node(t, k) = std::exp(out.alpha(t, k) + out.beta(t, k) - lz);
  out.edges.assign(T, Matrix(K + 1, K));
  out.edge_counts = Matrix(K + 1, K);
  for (std::size_t k = 0; k < K; ++k) out.edges[0](K, k) = out.node(0, k);
  for (std::size_t t = 1; t < T; ++t)
    for (std::size_t j = 0; j < K; ++j)
      for (std::size_t k = 0; k < K; ++k)
        out.edges[t](j, k) =
            std::exp(out.alpha(t - 1, j) + trans(j, k) + phi(t, k) + out.beta(t, k) - lz);
  for (const auto& e : out.edges)
    for (std::size_t i = 0; i < e.data.size(); ++i) out.edge_counts.data[i] += e.data[i];
  return out;
}

ChainDecode chain_viterbi(const Matrix& phi, const Matrix& trans) {
  check_shapes(phi, trans);
  const auto T = phi.rows, K = phi.cols;
  // best(t, k): best score of y_t..y_T given y_t = k, counting phi(t, k).
  Matrix best(T, K);
  for (std::size_t k = 0; k < K; ++k) best(T - 1, k) = phi(T - 1, k);
  for (std::size_t t = T - 1; t-- > 0;)
    for (std::size_t j = 0; j < K; ++j) {
      double m = kNegInf;
      for (std::size_t k = 0; k < K; ++k) m = std::max(m, trans(j, k) + best(t + 1, k));
      best(t, j) = phi(t, j) + m;
    }
  // A forward greedy pass over exact maxima picks the smallest id at each
  // step, which yields the lexicographically smallest optimum.
  ChainDecode out;
  std::size_t prev = K;
  for (std::size_t t = 0; t < T; ++t) {
    std::size_t arg = 0;
    double m = kNegInf;
    for (std::size_t k = 0; k < K; ++k) {
      const double v = trans(prev, k) + best(t, k);
      if (v > m) m = v, arg = k;
    }
    out.labels.push_back(int(arg));
    prev = arg;
  }
  out.score = chain_score(phi, trans, out.labels);
  return out;
}

// ---------------------------------------------------------------------------

LinearChainCrf::LinearChainCrf(int vocab_size, int num_labels, CrfOptions opts)
    : vocab_(vocab_size), labels_(num_labels), opts_(opts) {
  if (vocab_size < 1 || num_labels < 1) throw InvalidArgument("LinearChainCrf: empty vocabulary or label set");
  if (opts.window < 0) throw InvalidArgument("LinearChainCrf: negative window");
  if (opts.hidden > 0)
    net_ = DenseNet({input_size(), opts.hidden, std::size_t(num_labels)},
                    {Activation::kTanh, Activation::kIdentity});
}

void LinearChainCrf::add_blocks(ParamVector& params) {
  if (opts_.hidden > 0)
    node_offset_ = net_.add_blocks(params, "crf.net");
  else
    node_offset_ = params.add_block("crf.node", input_size() * std::size_t(labels_));
  trans_offset_ = params.add_block("crf.trans", std::size_t(labels_ + 1) * std::size_t(labels_));
  has_blocks_ = true;
}

void LinearChainCrf::init(ParamVector& params, Rng& rng, double scale) const {
  if (opts_.hidden > 0) {
    net_.init(params.values().subspan(node_offset_, net_.num_params()), rng, scale);
  } else {
    for (auto& w : params.values().subspan(node_offset_, input_size() * std::size_t(labels_)))
      w = rng.uniform(-scale, scale);
  }
}

void LinearChainCrf::check(std::span<const int> x) const {
  if (!has_blocks_) throw InvalidArgument("LinearChainCrf: add_blocks was not called");
  if (x.empty()) throw InvalidArgument("LinearChainCrf: empty sentence");
  for (int w : x)
    if (w < 0 || w >= vocab_) throw InvalidArgument("LinearChainCrf: word id out of range");
}

std::vector<int> LinearChainCrf::window_ids(std::span<const int> x, std::size_t t) const {
  std::vector<int> ids;
  const int n = int(x.size()), w = opts_.window;
  for (int o = -w; o <= w; ++o) {
    const int p = int(t) + o;
    const int word = (p < 0 || p >= n) ? vocab_ : x[std::size_t(p)];
    ids.push_back((o + w) * (vocab_ + 1) + word);
  }
  return ids;
}

Matrix LinearChainCrf::node_potentials(const ParamVector& params, std::span<const int> x) const {
  check(x);
  const auto K = std::size_t(labels_);
  Matrix phi(x.size(), K);
  const auto theta = params.values();
  for (std::size_t t = 0; t < x.size(); ++t) {
    const auto ids = window_ids(x, t);
    if (opts_.hidden > 0) {
      std::vector<double> in(input_size(), 0.0);
      for (int i : ids) in[std::size_t(i)] = 1.0;
      const auto out = net_.output(theta.subspan(node_offset_, net_.num_params()), in);
      for (std::size_t k = 0; k < K; ++k) phi(t, k) = out[k];
    } else {
      for (int i : ids)
        for (std::size_t k = 0; k < K; ++k) phi(t, k) += theta[node_offset_ + std::size_t(i) * K + k];
    }
  }
  return phi;
}

Matrix LinearChainCrf::transitions(const ParamVector& params) const {
  if (!has_blocks_) throw InvalidArgument("LinearChainCrf: add_blocks was not called");
  const auto K = std::size_t(labels_);
  Matrix a(K + 1, K);
  const auto v = params.values().subspan(trans_offset_, a.data.size());
  std::copy(v.begin(), v.end(), a.data.begin());
  return a;
}

void LinearChainCrf::add_grad(const ParamVector& params, std::span<const int> x, const Matrix& dphi,
                              const Matrix& dtrans, double scale, std::span<double> grad) const {
  check(x);
  const auto K = std::size_t(labels_);
  if (dphi.rows != x.size() || dphi.cols != K || dtrans.rows != K + 1 || dtrans.cols != K)
    throw ShapeMismatch("LinearChainCrf::add_grad: gradient shapes");
  for (std::size_t t = 0; t < x.size(); ++t) {
    const auto ids = window_ids(x, t);
    if (opts_.hidden > 0) {
      std::vector<double> in(input_size(), 0.0);
      for (int i : ids) in[std::size_t(i)] = 1.0;
      const auto theta = params.values().subspan(node_offset_, net_.num_params());
      const auto acts = net_.forward(theta, in);
      net_.backward(theta, acts, dphi.row(t), grad.subspan(node_offset_, net_.num_params()), scale);
    } else {
      for (int i : ids)
        for (std::size_t k = 0; k < K; ++k) grad[node_offset_ + std::size_t(i) * K + k] += scale * dphi(t, k);
    }
  }
  for (std::size_t i = 0; i < dtrans.data.size(); ++i) grad[trans_offset_ + i] += scale * dtrans.data[i];
}

double LinearChainCrf::score(const ParamVector& params, std::span<const int> x,
                             std::span<const int> y) const {
  return chain_score(node_potentials(params, x), transitions(params), y);
}

double LinearChainCrf::log_partition(const ParamVector& params, std::span<const int> x) const {
  return chain_log_partition(node_potentials(params, x), transitions(params));
}

double LinearChainCrf::log_conditional(const ParamVector& params, std::span<const int> x,
                                       std::span<const int> y) const {
  const auto phi = node_potentials(params, x);
  const auto trans = transitions(params);
  return chain_score(phi, trans, y) - chain_log_partition(phi, trans);
}

ChainPosteriors LinearChainCrf::posteriors(const ParamVector& params, std::span<const int> x) const {
  return chain_forward_backward(node_potentials(params, x), transitions(params));
}

ChainDecode LinearChainCrf::viterbi(const ParamVector& params, std::span<const int> x) const {
  return chain_viterbi(node_potentials(params, x), transitions(params));
}

void LinearChainCrf::add_log_partition_grad(const ParamVector& params, std::span<const int> x,
                                            double scale, std::span<double> grad) const {
  const auto post = posteriors(params, x);
  add_grad(params, x, post.node, post.edge_counts, scale, grad);
}

void LinearChainCrf::add_score_grad(const ParamVector& params, std::span<const int> x,
                                    std::span<const int> y, double scale,
                                    std::span<double> grad) const {
  if (y.size() != x.size()) throw ShapeMismatch("LinearChainCrf: label length differs from sentence");
  const auto K = std::size_t(labels_);
  Matrix dphi(x.size(), K), dtrans(K + 1, K);
  std::size_t prev = K;
  for (std::size_t t = 0; t < y.size(); ++t) {
    if (y[t] < 0 || std::size_t(y[t]) >= K) throw InvalidArgument("LinearChainCrf: label out of range");
    dphi(t, std::size_t(y[t])) = 1.0;
    dtrans(prev, std::size_t(y[t])) += 1.0;
    prev = std::size_t(y[t]);
  }
  add_grad(params, x, dphi, dtrans, scale, grad);
}

ObjectiveValue crf_cml_loss(const LinearChainCrf& crf, const ParamVector& params,
                            const std::vector<TaggedSentence>& batch) {
  ObjectiveValue out;
  out.gradient.assign(params.size(), 0.0);
  const auto K = std::size_t(crf.num_labels());
  for (const auto& s : batch) {
    if (s.labels.size() != s.words.size()) throw ShapeMismatch("crf_cml_loss: label length differs from sentence");
    const auto phi = crf.node_potentials(params, s.words);
    const auto trans = crf.transitions(params);
    const auto post = chain_forward_backward(phi, trans);
    out.value += post.log_z - chain_score(phi, trans, s.labels);
    // Error signal p(y_t = k | x) - delta(y_t = k), and likewise for edges.
    Matrix dphi = post.node, dtrans = post.edge_counts;
    std::size_t prev = K;
    for (std::size_t t = 0; t < s.labels.size(); ++t) {
      const auto k = std::size_t(s.labels[t]);
      dphi(t, k) -= 1.0;
      dtrans(prev, k) -= 1.0;
      prev = k;
    }
    crf.add_grad(params, s.words, dphi, dtrans, 1.0, out.gradient);
  }
  return out;
}

void crf_cml_train(const LinearChainCrf& crf, ParamVector& params,
                   const std::vector<TaggedSentence>& data, const CrfTrainConfig& cfg) {
  if (data.empty()) throw InvalidArgument("crf_cml_train: empty data");
  Rng rng(cfg.seed, 0);
  Adam adam(cfg.lr);
  std::vector<TaggedSentence> batch(cfg.batch);
  for (std::uint64_t t = 1; t <= cfg.steps; ++t) {
    for (auto& s : batch) s = data[rng.uniform_int(data.size())];
    auto obj = crf_cml_loss(crf, params, batch);
    const auto v = params.values();
    for (std::size_t i = 0; i < v.size(); ++i) obj.gradient[i] = obj.gradient[i] / double(cfg.batch) + cfg.l2 * v[i];
    adam.descend(params.values(), obj.gradient);
    if (cfg.on_step) cfg.on_step(t, obj.value / double(cfg.batch));
  }
}

double crf_accuracy(const LinearChainCrf& crf, const ParamVector& params,
                    const std::vector<TaggedSentence>& data) {
  std::size_t right = 0, total = 0;
  for (const auto& s : data) {
    const auto d = crf.viterbi(params, s.words);
    for (std::size_t t = 0; t < s.labels.size(); ++t) right += d.labels[t] == s.labels[t];
    total += s.labels.size();
  }
  if (total == 0) throw InvalidArgument("crf_accuracy: no tokens");
  return double(right) / double(total);
}

}  // namespace ebm
