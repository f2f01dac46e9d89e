// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ebm/seq/crf_transducer.hpp"

#include <algorithm>
#include <cmath>

#include "ebm/discrete_space.hpp"
#include "ebm/error.hpp"

namespace ebm {

CrfTransducer::CrfTransducer(int vocab_size, int num_labels, TransducerOptions opts)
    : vocab_(vocab_size), labels_(num_labels), opts_(opts) {
  if (vocab_size < 1 || num_labels < 1) throw InvalidArgument("CrfTransducer: empty vocabulary or label set");
  if (opts.window < 0 || opts.embedding == 0 || opts.prediction_hidden == 0)
    throw InvalidArgument("CrfTransducer: bad network sizes");
  const auto in = std::size_t((2 * opts.window + 1) * (vocab_size + 1));
  const auto K = std::size_t(num_labels);
  if (opts.transcription_hidden > 0)
    trans_net_ = DenseNet({in, opts.transcription_hidden, K}, {Activation::kTanh, Activation::kIdentity});
  else
    trans_net_ = DenseNet({in, K}, {Activation::kIdentity});
  cell_ = SimpleRecurrentCell(opts.embedding, opts.prediction_hidden);
  pred_out_ = DenseNet({opts.prediction_hidden, K}, {Activation::kIdentity});
}

void CrfTransducer::add_blocks(ParamVector& params) {
  trans_off_ = trans_net_.add_blocks(params, "crft.trans_net");
  embed_off_ = params.add_block("crft.embed", std::size_t(labels_ + 1) * opts_.embedding);
  cell_off_ = cell_.add_blocks(params, "crft.cell");
  out_off_ = pred_out_.add_blocks(params, "crft.pred_out");
  has_blocks_ = true;
}

void CrfTransducer::init(ParamVector& params, Rng& rng, double scale) const {
  if (!has_blocks_) throw InvalidArgument("CrfTransducer: add_blocks was not called");
  auto v = params.values();
  trans_net_.init(v.subspan(trans_off_, trans_net_.num_params()), rng, scale);
  for (auto& w : v.subspan(embed_off_, std::size_t(labels_ + 1) * opts_.embedding)) w = rng.uniform(-scale, scale);
  cell_.init(v.subspan(cell_off_, cell_.num_params()), rng, scale);
  pred_out_.init(v.subspan(out_off_, pred_out_.num_params()), rng, scale);
}

std::vector<double> CrfTransducer::window_input(std::span<const int> x, std::size_t t) const {
  std::vector<double> in(trans_net_.input_size(), 0.0);
  const int n = int(x.size()), w = opts_.window;
  for (int o = -w; o <= w; ++o) {
    const int p = int(t) + o;
    const int word = (p < 0 || p >= n) ? vocab_ : x[std::size_t(p)];
    in[std::size_t((o + w) * (vocab_ + 1) + word)] = 1.0;
  }
  return in;
}

Matrix CrfTransducer::node_potentials(const ParamVector& params, std::span<const int> x) const {
  if (!has_blocks_) throw InvalidArgument("CrfTransducer: add_blocks was not called");
  if (x.empty()) throw InvalidArgument("CrfTransducer: empty sentence");
  for (int w : x)
    if (w < 0 || w >= vocab_) throw InvalidArgument("CrfTransducer: word id out of range");
  const auto K = std::size_t(labels_);
  Matrix phi(x.size(), K);
  const auto theta = block(params, trans_off_, trans_net_.num_params());
  for (std::size_t t = 0; t < x.size(); ++t) {
    auto f = trans_net_.output(theta, window_input(x, t));
    if (opts_.design == PotentialDesign::kB) f = log_softmax(f);
    std::copy(f.begin(), f.end(), phi.row(t).begin());
  }
  return phi;
}

CrfTransducer::Prefix CrfTransducer::start(const ParamVector& params) const {
  if (!has_blocks_) throw InvalidArgument("CrfTransducer: add_blocks was not called");
  Prefix p;
  const std::vector<double> h0(opts_.prediction_hidden, 0.0);
  const auto e = block(params, embed_off_ + std::size_t(labels_) * opts_.embedding, opts_.embedding);
  p.hidden = cell_.step(block(params, cell_off_, cell_.num_params()), h0, e);
  return p;
}

std::vector<double> CrfTransducer::clique_potentials(const ParamVector& params, const Prefix& p) const {
  auto g = pred_out_.output(block(params, out_off_, pred_out_.num_params()), p.hidden);
  if (opts_.design == PotentialDesign::kB) g = log_softmax(g);
  return g;
}

CrfTransducer::Prefix CrfTransducer::extend(const ParamVector& params, const Matrix& phi, const Prefix& p,
                                            int k, std::span<const double> psi) const {
  Prefix q;
  q.labels = p.labels;
  q.labels.push_back(k);
  q.score = p.score + phi(p.labels.size(), std::size_t(k)) + psi[std::size_t(k)];
  const auto e = block(params, embed_off_ + std::size_t(k) * opts_.embedding, opts_.embedding);
  q.hidden = cell_.step(block(params, cell_off_, cell_.num_params()), p.hidden, e);
  return q;
}

double CrfTransducer::score(const ParamVector& params, std::span<const int> x, std::span<const int> y) const {
  if (y.size() > x.size()) throw ShapeMismatch("CrfTransducer: more labels than words");
  const auto phi = node_potentials(params, x);
  auto p = start(params);
  for (int k : y) {
    if (k < 0 || k >= labels_) throw InvalidArgument("CrfTransducer: label out of range");
    p = extend(params, phi, p, k, clique_potentials(params, p));
  }
  return p.score;
}

void CrfTransducer::add_score_grad(const ParamVector& params, std::span<const int> x, std::span<const int> y,
                                   double scale, std::span<double> grad) const {
  if (y.size() > x.size()) throw ShapeMismatch("CrfTransducer: more labels than words");
  if (!has_blocks_) throw InvalidArgument("CrfTransducer: add_blocks was not called");
  const auto K = std::size_t(labels_), E = opts_.embedding;
  const bool local_softmax = opts_.design == PotentialDesign::kB;
  // d phi_i(y_i) / d f_i, or d psi_i(y_i) / d g_i.
  auto local_grad = [&](const std::vector<double>& out, int label) {
    std::vector<double> d(K, 0.0);
    if (local_softmax) {
      const auto p = softmax(out);
      for (std::size_t k = 0; k < K; ++k) d[k] = -p[k];
    }
    d[std::size_t(label)] += 1.0;
    return d;
  };

  const auto tn = block(params, trans_off_, trans_net_.num_params());
  auto tg = grad.subspan(trans_off_, trans_net_.num_params());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const auto acts = trans_net_.forward(tn, window_input(x, i));
    trans_net_.backward(tn, acts, local_grad(acts.output(), y[i]), tg, scale);
  }
  if (y.empty()) return;

  // Inputs to the cell: start, y_1, ..., y_{j-1}.
  std::vector<int> in_labels{labels_};
  in_labels.insert(in_labels.end(), y.begin(), y.end() - 1);
  std::vector<std::vector<double>> inputs;
  for (int l : in_labels) {
    const auto e = block(params, embed_off_ + std::size_t(l) * E, E);
    inputs.emplace_back(e.begin(), e.end());
  }
  const auto cn = block(params, cell_off_, cell_.num_params());
  const auto on = block(params, out_off_, pred_out_.num_params());
  const auto cell_acts = cell_.forward(cn, inputs);
  std::vector<std::vector<double>> hidden_grads;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const auto acts = pred_out_.forward(on, cell_acts.states[i + 1]);
    hidden_grads.push_back(pred_out_.backward(on, acts, local_grad(acts.output(), y[i]),
                                              grad.subspan(out_off_, pred_out_.num_params()), scale));
  }
  const auto input_grads =
      cell_.backward(cn, cell_acts, hidden_grads, grad.subspan(cell_off_, cell_.num_params()), scale);
  for (std::size_t i = 0; i < in_labels.size(); ++i)
    for (std::size_t d = 0; d < E; ++d)
      grad[embed_off_ + std::size_t(in_labels[i]) * E + d] += scale * input_grads[i][d];
}

// ---------------------------------------------------------------------------

namespace {

struct Candidate {
  std::size_t parent;
  int label;
  double score;
};

// One beam step: expand every prefix by every label and keep the best width.
std::vector<CrfTransducer::Prefix> beam_step(const CrfTransducer& model, const ParamVector& params,
                                             const Matrix& phi,
                                             const std::vector<CrfTransducer::Prefix>& beam,
                                             std::size_t width) {
  const int K = model.num_labels();
  const std::size_t i = beam.front().labels.size();
  std::vector<std::vector<double>> psi;
  std::vector<Candidate> cands;
  for (std::size_t b = 0; b < beam.size(); ++b) {
    psi.push_back(model.clique_potentials(params, beam[b]));
    for (int k = 0; k < K; ++k)
      cands.push_back({b, k, beam[b].score + phi(i, std::size_t(k)) + psi[b][std::size_t(k)]});
  }
  // The beam is kept in tie-broken order, so comparing (parent, label) is
  // the same as comparing label prefixes.
  std::sort(cands.begin(), cands.end(), [&](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.parent != b.parent) return beam[a.parent].labels < beam[b.parent].labels;
    return a.label < b.label;
  });
  if (cands.size() > width) cands.resize(width);
  std::vector<CrfTransducer::Prefix> next;
  for (const auto& c : cands) next.push_back(model.extend(params, phi, beam[c.parent], c.label, psi[c.parent]));
  return next;
}

}  // namespace

std::vector<CrfTransducer::Prefix> crft_beam(const CrfTransducer& model, const ParamVector& params,
                                             std::span<const int> x, std::size_t width) {
  if (width == 0) throw InvalidArgument("crft_beam: width must be at least 1");
  const auto phi = model.node_potentials(params, x);
  std::vector<CrfTransducer::Prefix> beam{model.start(params)};
  for (std::size_t i = 0; i < x.size(); ++i) beam = beam_step(model, params, phi, beam, width);
  return beam;
}

std::vector<int> crft_decode(const CrfTransducer& model, const ParamVector& params,
                             std::span<const int> x, std::size_t width) {
  return crft_beam(model, params, x, width).front().labels;
}

double crft_exact_loss(const CrfTransducer& model, const ParamVector& params,
                       std::span<const int> x, std::span<const int> y) {
  if (y.size() != x.size()) throw ShapeMismatch("crft_exact_loss: label length differs from sentence");
  LogSumExp z;
  DiscreteSpace::product(std::vector<int>(x.size(), model.num_labels()))
      .for_each([&](std::span<const int> yy) { z.add(model.score(params, x, yy)); });
  return z.value() - model.score(params, x, y);
}

EarlyUpdate crft_early_update_loss(const CrfTransducer& model, const ParamVector& params,
                                   std::span<const int> x, std::span<const int> y, std::size_t width) {
  if (width == 0) throw InvalidArgument("crft_early_update_loss: width must be at least 1");
  if (y.size() != x.size()) throw ShapeMismatch("crft_early_update_loss: label length differs from sentence");
  const auto phi = model.node_potentials(params, x);
  std::vector<CrfTransducer::Prefix> beam{model.start(params)};
  EarlyUpdate out;
  for (std::size_t j = 1; j <= x.size(); ++j) {
    beam = beam_step(model, params, phi, beam, width);
    const auto oracle = y.first(j);
    const bool kept = std::any_of(beam.begin(), beam.end(), [&](const auto& p) {
      return std::equal(p.labels.begin(), p.labels.end(), oracle.begin(), oracle.end());
    });
    if (kept && j < x.size()) continue;

    std::vector<std::vector<int>> members;
    std::vector<double> scores;
    for (const auto& p : beam) members.push_back(p.labels), scores.push_back(p.score);
    const double u_star = model.score(params, x, oracle);
    if (!kept) members.emplace_back(oracle.begin(), oracle.end()), scores.push_back(u_star);
    const double lz = log_sum_exp(scores);
    out.loss = lz - u_star;
    out.step = j;
    out.early = !kept;
    out.gradient.assign(params.size(), 0.0);
    model.add_score_grad(params, x, oracle, -1.0, out.gradient);
    for (std::size_t m = 0; m < members.size(); ++m)
      model.add_score_grad(params, x, members[m], std::exp(scores[m] - lz), out.gradient);
    break;
  }
  return out;
}

TransducerTrainReport crft_train_beam(const CrfTransducer& model, ParamVector& params,
                                      const std::vector<TaggedSentence>& data,
                                      const TransducerTrainConfig& cfg) {
  if (data.empty()) throw InvalidArgument("crft_train_beam: empty data");
  Rng rng(cfg.seed, 0);
  Adam adam(cfg.lr);
  TransducerTrainReport report;
  std::vector<double> grad(params.size());
  for (std::uint64_t t = 1; t <= cfg.steps; ++t) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double loss = 0;
    for (std::size_t b = 0; b < cfg.batch; ++b) {
      const auto& s = data[rng.uniform_int(data.size())];
      const auto up = crft_early_update_loss(model, params, s.words, s.labels, cfg.width);
      for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += up.gradient[i] / double(cfg.batch);
      loss += up.loss / double(cfg.batch);
      report.early_updates += up.early;
    }
    const auto v = params.values();
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += cfg.l2 * v[i];
    adam.descend(params.values(), grad);
    report.updates += cfg.batch;
    report.last_loss = loss;
    if (cfg.on_step) cfg.on_step(t, loss);
  }
  return report;
}

double crft_accuracy(const CrfTransducer& model, const ParamVector& params,
                     const std::vector<TaggedSentence>& data, std::size_t width) {
  std::size_t right = 0, total = 0;
  for (const auto& s : data) {
    const auto d = crft_decode(model, params, s.words, width);
    for (std::size_t t = 0; t < s.labels.size(); ++t) right += d[t] == s.labels[t];
    total += s.labels.size();
  }
  if (total == 0) throw InvalidArgument("crft_accuracy: no tokens");
  return double(right) / double(total);
}

}  // namespace ebm
