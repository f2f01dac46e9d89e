// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ebm/seq/jrf.hpp"

#include <cmath>

#include "ebm/error.hpp"
#include "ebm/optim.hpp"

namespace ebm {

JrfModel::JrfModel(LinearChainCrf crf, std::vector<double> pi) : crf_(std::move(crf)), pi_(std::move(pi)) {
  if (pi_.empty()) throw InvalidArgument("JrfModel: empty length distribution");
  double total = 0;
  for (double p : pi_) {
    if (!(p > 0)) throw InvalidArgument("JrfModel: length probabilities must be positive");
    total += p;
    log_pi_.push_back(std::log(p));
  }
  if (std::abs(total - 1) > 1e-9) throw InvalidArgument("JrfModel: length probabilities must sum to 1");
  crf_.add_blocks(params_);
  // Exact at theta = 0: log of (V K)^l.
  enable_zeta(pi_.size(), 0.0);
  const double per_token = std::log(double(crf_.vocab_size()) * double(crf_.num_labels()));
  auto zeta = params_.block("zeta");
  for (std::size_t l = 0; l < zeta.size(); ++l) zeta[l] = double(l + 1) * per_token;
}

void JrfModel::check_length(std::span<const int> x) const {
  if (x.empty() || x.size() > pi_.size()) throw InvalidArgument("JrfModel: sentence length outside [1, L]");
}

double JrfModel::marginal_potential(std::span<const int> x) const {
  return crf_.log_partition(params_, x);
}

double JrfModel::potential(std::span<const int> x) const {
  check_length(x);
  return log_pi_[x.size() - 1] + marginal_potential(x);
}

void JrfModel::add_potential_grad(std::span<const int> x, double scale, std::span<double> grad) const {
  check_length(x);
  crf_.add_log_partition_grad(params_, x, scale, grad);
}

std::size_t JrfModel::zeta_slot(std::span<const int> x) const {
  check_length(x);
  return x.size() - 1;
}

double JrfModel::log_joint(std::span<const int> x, std::span<const int> y) const {
  check_length(x);
  return log_pi_[x.size() - 1] + crf_.score(params_, x, y) - zeta(x);
}

double JrfModel::log_conditional(std::span<const int> x, std::span<const int> y) const {
  return crf_.log_conditional(params_, x, y);
}

std::vector<double> JrfModel::exact_log_normalizers() const {
  std::vector<double> out;
  for (int l = 1; l <= max_length(); ++l) {
    LogSumExp acc;
    DiscreteSpace::sequences(crf_.vocab_size(), l, l).for_each([&](std::span<const int> x) {
      acc.add(marginal_potential(x));
    });
    out.push_back(acc.value());
  }
  return out;
}

void JrfModel::set_zeta(std::span<const double> zeta) {
  auto z = params_.block("zeta");
  if (zeta.size() != z.size()) throw ShapeMismatch("JrfModel::set_zeta: one value per length");
  std::copy(zeta.begin(), zeta.end(), z.begin());
}

double jrf_marginal_potential(const JrfModel& jrf, std::span<const int> x) {
  return jrf.marginal_potential(x);
}

JrfTrainReport jrf_semi_train(JrfModel& jrf, const std::vector<TaggedSentence>& labeled,
                              const std::vector<std::vector<int>>& unlabeled,
                              TrainableDistribution& noise, const JrfSemiConfig& cfg) {
  if (labeled.empty()) throw InvalidArgument("jrf_semi_train: no labeled data");
  if (cfg.alpha < 0) throw InvalidArgument("jrf_semi_train: alpha must be non-negative");
  if (cfg.alpha > 0 && unlabeled.empty()) throw InvalidArgument("jrf_semi_train: no unlabeled data");
  for (const auto& x : unlabeled)
    if (x.empty() || x.size() > std::size_t(jrf.max_length()))
      throw InvalidArgument("jrf_semi_train: unlabeled sentence longer than L");

  const auto& zeta_info = jrf.params().info("zeta");
  Rng lab_rng(cfg.seed, 0), unl_rng(cfg.seed, 1), noise_rng(cfg.seed, 2);
  Adam adam(cfg.lr);
  JrfTrainReport report;
  std::vector<TaggedSentence> lab(cfg.labeled_batch);
  std::vector<Config> d(cfg.unlabeled_batch), b1(cfg.unlabeled_batch), b2(2 * cfg.unlabeled_batch);
  for (std::uint64_t t = 1; t <= cfg.steps; ++t) {
    for (auto& s : lab) s = labeled[lab_rng.uniform_int(labeled.size())];
    auto sup = crf_cml_loss(jrf.crf(), jrf.params(), lab);
    auto& grad = sup.gradient;
    const auto v = jrf.params().values();
    for (std::size_t i = 0; i < grad.size(); ++i) {
      const bool is_zeta = i >= zeta_info.offset && i < zeta_info.offset + zeta_info.size;
      grad[i] = grad[i] / double(cfg.labeled_batch) + (is_zeta ? 0.0 : cfg.l2 * v[i]);
    }
    report.last_supervised_loss = sup.value / double(cfg.labeled_batch);
    if (cfg.alpha > 0) {
      for (auto& x : d) x = unlabeled[unl_rng.uniform_int(unlabeled.size())];
      for (auto& x : b1) x = noise.sample(noise_rng);
      for (auto& x : b2) x = noise.sample(noise_rng);
      // nu = 1 and mixing weight 1/2 give |B1| = |D| and |B2| = 2|D|.
      const auto uns = dnce_objective(jrf, noise, 1.0, 0.5, d, b1, b2);
      for (std::size_t i = 0; i < grad.size(); ++i) grad[i] -= cfg.alpha * uns.gradient[i];
      report.last_unsupervised_value = uns.value;
      for (double g : grad)
        if (!std::isfinite(g)) throw NumericalError("jrf_semi_train: non-finite gradient at step " + std::to_string(t));
      adam.descend(jrf.params().values(), grad);
      noise.mle_step(d, cfg.noise_lr);
    } else {
      adam.descend(jrf.params().values(), grad);
    }
  }
  return report;
}

}  // namespace ebm
