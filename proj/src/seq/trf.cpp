// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ebm/seq/trf.hpp"

#include <cmath>

#include "ebm/error.hpp"
#include "ebm/numeric.hpp"
#include "ebm/oracle.hpp"

namespace ebm {

SequencePotential::SequencePotential(NgramFeatureSet features, int vocab_size, std::size_t hidden)
    : features_(std::move(features)), vocab_(vocab_size), hidden_(hidden) {
  if (vocab_size < 1) throw InvalidArgument("SequencePotential: empty vocabulary");
  if (hidden_ > 0)
    net_ = DenseNet({std::size_t(2 * vocab_ + 1), hidden_, 1}, {Activation::kTanh, Activation::kIdentity});
}

void SequencePotential::add_blocks(ParamVector& params) {
  lambda_offset_ = params.add_block("lambda", features_.size());
  if (hidden_ > 0) net_offset_ = net_.add_blocks(params, "net");
}

void SequencePotential::init_neural(ParamVector& params, Rng& rng, double scale) const {
  if (hidden_ == 0) return;
  net_.init(params.values().subspan(net_offset_, net_.num_params()), rng, scale);
}

std::vector<double> SequencePotential::net_input(std::span<const int> x, std::size_t t) const {
  std::vector<double> in(std::size_t(2 * vocab_ + 1), 0.0);
  in[t == 0 ? 0 : std::size_t(1 + x[t - 1])] = 1.0;
  in[std::size_t(vocab_ + 1 + x[t])] = 1.0;
  return in;
}

double SequencePotential::value(const ParamVector& params, std::span<const int> x) const {
  for (int w : x)
    if (w < 0 || w >= vocab_) throw InvalidArgument("sequence potential: token out of range");
  const auto lambda = params.values().subspan(lambda_offset_, features_.size());
  double u = 0;
  for (const auto& [i, c] : features_.extract(x)) u += lambda[i] * c;
  if (hidden_ > 0) {
    const auto theta = params.values().subspan(net_offset_, net_.num_params());
    for (std::size_t t = 0; t < x.size(); ++t) u += net_.output(theta, net_input(x, t))[0];
  }
  return u;
}

void SequencePotential::add_grad(const ParamVector& params, std::span<const int> x, double scale,
                                 std::span<double> grad) const {
  for (const auto& [i, c] : features_.extract(x)) grad[lambda_offset_ + i] += scale * c;
  if (hidden_ > 0) {
    const auto theta = params.values().subspan(net_offset_, net_.num_params());
    auto g = grad.subspan(net_offset_, net_.num_params());
    const double one = 1.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
      const auto acts = net_.forward(theta, net_input(x, t));
      net_.backward(theta, acts, std::span(&one, 1), g, scale);
    }
  }
}

std::vector<double> length_probabilities(const std::vector<Config>& corpus, int max_len) {
  if (max_len < 1) throw InvalidArgument("length_probabilities: max_len must be >= 1");
  std::vector<double> pi(std::size_t(max_len), 1.0);
  for (const auto& s : corpus) {
    if (s.empty() || int(s.size()) > max_len)
      throw InvalidArgument("length_probabilities: sentence length " + std::to_string(s.size()) +
                            " outside [1, " + std::to_string(max_len) + "]");
    pi[s.size() - 1] += 1;
  }
  const double total = double(corpus.size()) + max_len;
  for (auto& p : pi) p /= total;
  return pi;
}

TrfModel::TrfModel(SequencePotential potential, std::vector<double> pi)
    : pot_(std::move(potential)), pi_(std::move(pi)) {
  if (pot_.features().options().eos) throw InvalidArgument("TrfModel: features must not include </s>");
  if (pi_.empty()) throw InvalidArgument("TrfModel: empty length distribution");
  double s = 0;
  for (double p : pi_) {
    if (!(p > 0)) throw InvalidArgument("TrfModel: length probabilities must be positive");
    s += p;
  }
  if (std::abs(s - 1) > 1e-9) throw InvalidArgument("TrfModel: length probabilities must sum to 1");
  for (double p : pi_) log_pi_.push_back(std::log(p));
  pot_.add_blocks(params_);
  enable_zeta(pi_.size());
  // Start from the normalizers of U = 0.
  auto z = params_.block("zeta");
  for (std::size_t l = 0; l < z.size(); ++l) z[l] = double(l + 1) * std::log(double(vocab_size()));
}

void TrfModel::check_length(std::span<const int> x) const {
  if (x.empty() || x.size() > pi_.size())
    throw InvalidArgument("TrfModel: length " + std::to_string(x.size()) + " outside [1, " +
                          std::to_string(pi_.size()) + "]");
}

double TrfModel::potential(std::span<const int> x) const {
  check_length(x);
  return log_pi_[x.size() - 1] + pot_.value(params_, x);
}

void TrfModel::add_potential_grad(std::span<const int> x, double scale, std::span<double> grad) const {
  check_length(x);
  pot_.add_grad(params_, x, scale, grad);
}

std::size_t TrfModel::zeta_slot(std::span<const int> x) const {
  check_length(x);
  return x.size() - 1;
}

std::vector<double> TrfModel::exact_log_normalizers() const {
  std::vector<double> out;
  for (int l = 1; l <= max_length(); ++l)
    out.push_back(enumerate_log_z([&](std::span<const int> x) { return pot_.value(params_, x); },
                                  DiscreteSpace::sequences(vocab_size(), l, l)));
  return out;
}

void TrfModel::set_zeta(std::span<const double> zeta) {
  auto z = params_.block("zeta");
  if (zeta.size() != z.size()) throw ShapeMismatch("TrfModel::set_zeta: expected one value per length");
  std::copy(zeta.begin(), zeta.end(), z.begin());
}

double trf_log_prob(const TrfModel& trf, std::span<const int> x) { return trf.log_model(x); }

GnElm::GnElm(SequencePotential potential, int max_len, bool length_features)
    : pot_(std::move(potential)), max_len_(max_len), length_features_(length_features) {
  if (max_len < 1) throw InvalidArgument("GnElm: max_len must be >= 1");
  pot_.add_blocks(params_);
  if (length_features_) params_.add_block("length", std::size_t(max_len));
}

double GnElm::potential(std::span<const int> x) const {
  if (x.empty() || int(x.size()) > max_len_) throw InvalidArgument("GnElm: length out of range");
  double u = pot_.value(params_, x);
  if (length_features_) u += params_.block("length")[x.size() - 1];
  return u;
}

void GnElm::add_potential_grad(std::span<const int> x, double scale, std::span<double> grad) const {
  pot_.add_grad(params_, x, scale, grad);
  if (length_features_) grad[params_.info("length").offset + x.size() - 1] += scale;
}

BigramNoise::BigramNoise(int vocab_size, std::vector<double> pi, bool per_position)
    : vocab_(vocab_size), pi_(std::move(pi)), per_position_(per_position) {
  if (vocab_size < 1) throw InvalidArgument("BigramNoise: empty vocabulary");
  if (pi_.empty()) throw InvalidArgument("BigramNoise: empty length distribution");
  std::size_t tables = 1;
  if (per_position_) {
    tables = 0;
    for (std::size_t l = 1; l <= pi_.size(); ++l) {
      for (std::size_t t = 0; t < l; ++t) table_offset_.push_back(tables++ * std::size_t(vocab_ + 1));
    }
  }
  logits_.assign(tables * std::size_t((vocab_ + 1) * vocab_), 0.0);
  refresh();
}

std::size_t BigramNoise::row(std::size_t len, std::size_t t, int prev) const {
  const std::size_t r = std::size_t(prev + 1);
  if (!per_position_) return r;
  // Tables for length l start after those of lengths 1..l-1.
  return table_offset_[(len - 1) * len / 2 + t] + r;
}

std::span<const double> BigramNoise::row_log_probs(std::size_t r) const {
  return std::span<const double>(log_probs_).subspan(r * std::size_t(vocab_), std::size_t(vocab_));
}

void BigramNoise::init_from(const NgramAlm& alm) {
  if (alm.vocab_size() != vocab_) throw ShapeMismatch("BigramNoise::init_from: vocabulary mismatch");
  const std::size_t rows = logits_.size() / std::size_t(vocab_);
  for (std::size_t r = 0; r < rows; ++r) {
    const int prev = int(r % std::size_t(vocab_ + 1)) - 1;
    std::vector<int> prefix;
    if (prev >= 0) prefix.push_back(prev);
    const auto p = alm.next_probs_no_eos(prefix);
    for (int w = 0; w < vocab_; ++w) logits_[r * std::size_t(vocab_) + std::size_t(w)] = std::log(p[std::size_t(w)]);
  }
  refresh();
}

void BigramNoise::refresh() {
  log_probs_.resize(logits_.size());
  const std::size_t rows = logits_.size() / std::size_t(vocab_);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto lp = log_softmax(std::span<const double>(logits_).subspan(r * std::size_t(vocab_), std::size_t(vocab_)));
    std::copy(lp.begin(), lp.end(), log_probs_.begin() + long(r * std::size_t(vocab_)));
  }
}

Config BigramNoise::sample(Rng& rng) const {
  const auto len = rng.categorical(pi_) + 1;
  Config x;
  int prev = -1;
  for (std::size_t t = 0; t < len; ++t) {
    prev = int(rng.categorical_log(row_log_probs(row(len, t, prev))));
    x.push_back(prev);
  }
  return x;
}

double BigramNoise::log_prob(std::span<const int> x) const {
  if (x.empty() || x.size() > pi_.size()) return kNegInf;
  double lp = std::log(pi_[x.size() - 1]);
  int prev = -1;
  for (std::size_t t = 0; t < x.size(); ++t) {
    if (x[t] < 0 || x[t] >= vocab_) throw InvalidArgument("BigramNoise: token out of range");
    lp += row_log_probs(row(x.size(), t, prev))[std::size_t(x[t])];
    prev = x[t];
  }
  return lp;
}

void BigramNoise::mle_step(const std::vector<Config>& batch, double lr) {
  if (batch.empty() || lr == 0) return;
  std::vector<double> grad(logits_.size(), 0.0);
  const double w = 1.0 / double(batch.size());
  for (const auto& x : batch) {
    int prev = -1;
    for (std::size_t t = 0; t < x.size(); ++t) {
      const std::size_t r = row(x.size(), t, prev);
      const auto lp = row_log_probs(r);
      const std::size_t base = r * std::size_t(vocab_);
      for (int k = 0; k < vocab_; ++k) grad[base + std::size_t(k)] -= w * std::exp(lp[std::size_t(k)]);
      grad[base + std::size_t(x[t])] += w;
      prev = x[t];
    }
  }
  for (std::size_t i = 0; i < logits_.size(); ++i) logits_[i] += lr * grad[i];
  refresh();
}

TrainingTrace train_trf_dnce(TrfModel& trf, const std::vector<Config>& corpus,
                             TrainableDistribution& noise, const DnceConfig& cfg) {
  for (const auto& s : corpus) {
    if (s.empty() || int(s.size()) > trf.max_length())
      throw InvalidArgument("train_trf_dnce: sentence length outside the model's range");
    if (noise.log_prob(s) == kNegInf)
      throw ConsistencyViolation("train_trf_dnce: noise assigns zero probability to a corpus sentence");
  }
  return dnce_train(trf, corpus, noise, cfg);
}

double mean_log_prob(const EnergyModel& model, const std::vector<Config>& corpus) {
  if (corpus.empty()) throw InvalidArgument("mean_log_prob: empty corpus");
  double s = 0;
  for (const auto& x : corpus) s += model.log_model(x);
  return s / double(corpus.size());
}

}  // namespace ebm
