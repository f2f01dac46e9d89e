// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ebm/learners.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "ebm/error.hpp"
#include "ebm/numeric.hpp"
#include "ebm/oracle.hpp"

namespace ebm {

SaSchedule::SaSchedule(double a, double b, double t0) : a_(a), b_(b), t0_(t0) {
  if (!(a >= 0) || !(b > 0) || !(t0 >= 0)) throw InvalidArgument("SaSchedule: need a >= 0, b > 0, t0 >= 0");
}

SaSchedule SaSchedule::constant(double a) {
  return SaSchedule(a, 1.0, std::numeric_limits<double>::infinity());
}

SaSchedule SaSchedule::default_for(std::uint64_t steps, double a) {
  const double t0 = std::max(1.0, std::floor(0.3 * double(steps)));
  return SaSchedule(a, t0, t0);
}

double SaSchedule::gamma(std::uint64_t t) const {
  const double tt = double(t);
  return tt < t0_ ? a_ : a_ * b_ / (b_ + tt - t0_);
}

SaSchedule LearnConfig::resolved_schedule() const {
  return schedule ? *schedule : SaSchedule::default_for(steps);
}

void TrainingTrace::write_csv(std::ostream& out) const {
  out << "step,objective,gamma,acceptance,zeta\n";
  const auto old = out.precision(10);
  for (const auto& r : rows_) {
    out << r.step << ',' << r.objective << ',' << r.gamma << ',' << r.acceptance << ',';
    if (r.has_zeta) out << r.zeta;
    out << '\n';
  }
  out.precision(old);
}

namespace {

bool is_zeta_block(const ParamBlock& b) { return b.name == "zeta"; }

// grad -= l2 * theta outside the zeta block.
void add_l2(const ParamVector& p, double l2, std::span<double> grad) {
  if (l2 == 0.0) return;
  for (const auto& b : p.blocks()) {
    if (is_zeta_block(b)) continue;
    for (std::size_t i = b.offset; i < b.offset + b.size; ++i) grad[i] -= l2 * p[i];
  }
}

void check_finite(std::span<const double> g, std::uint64_t step, const char* who) {
  for (double v : g)
    if (!std::isfinite(v))
      throw NumericalError(std::string(who) + ": non-finite update at step " + std::to_string(step));
}

// theta += gamma * step_multiplier * grad.
void apply_step(ParamVector& p, double gamma, std::span<const double> grad) {
  const auto mult = p.step_multipliers();
  auto v = p.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += gamma * mult[i] * grad[i];
}

class TailAverager {
 public:
  TailAverager(std::uint64_t steps, double tail)
      : start_(tail > 0 ? steps - std::uint64_t(std::floor(tail * double(steps))) : steps + 1) {}
  void observe(std::uint64_t t, std::span<const double> v) {
    if (t <= start_) return;
    if (sum_.empty()) sum_.assign(v.size(), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) sum_[i] += v[i];
    ++n_;
  }
  void finish(std::span<double> v) const {
    if (!n_) return;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = sum_[i] / double(n_);
  }

 private:
  std::uint64_t start_;
  std::vector<double> sum_;
  std::uint64_t n_ = 0;
};

double zeta_value(const EnergyModel& m) {
  return m.params().has_block("zeta") ? m.params().block("zeta")[0] : 0.0;
}

std::vector<double> uniform_weights(std::size_t n, double total) {
  return std::vector<double>(n, n ? total / double(n) : 0.0);
}

const Config& pick(const std::vector<Config>& data, Rng& rng) {
  return data[rng.uniform_int(data.size())];
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<double> sa_run(std::vector<double> lambda, const SaUpdateFn& update,
                           const SaConfig& cfg) {
  if (cfg.moves == 0) throw InvalidArgument("sa_run: moves must be positive");
  Rng rng(cfg.seed, 0);
  std::vector<double> f(lambda.size()), acc(lambda.size());
  TailAverager avg(cfg.steps, cfg.average_tail);
  for (std::uint64_t t = 1; t <= cfg.steps; ++t) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t k = 0; k < cfg.moves; ++k) {
      std::fill(f.begin(), f.end(), 0.0);
      update(lambda, rng, f);
      for (std::size_t i = 0; i < f.size(); ++i) acc[i] += f[i] / double(cfg.moves);
    }
    check_finite(acc, t, "sa_run");
    const double g = cfg.schedule.gamma(t);
    for (std::size_t i = 0; i < lambda.size(); ++i) lambda[i] += g * acc[i];
    avg.observe(t, lambda);
  }
  avg.finish(lambda);
  return lambda;
}

// ---------------------------------------------------------------------------

std::vector<double> sml_gradient_estimate(const EnergyModel& model, const std::vector<Config>& data,
                                          const std::vector<Config>& negatives) {
  std::vector<double> g(model.num_params(), 0.0);
  for (const auto& x : data) model.add_potential_grad(x, 1.0 / double(data.size()), g);
  for (const auto& x : negatives) model.add_potential_grad(x, -1.0 / double(negatives.size()), g);
  return g;
}

TrainingTrace sml_train(EnergyModel& model, const std::vector<Config>& data,
                        const DiscreteKernel& kernel, const SmlConfig& cfg) {
  if (data.empty()) throw InvalidArgument("sml_train: empty data");
  if (cfg.batch == 0) throw InvalidArgument("sml_train: batch must be positive");
  const auto schedule = cfg.resolved_schedule();
  const std::size_t k = cfg.chains ? cfg.chains : cfg.batch;
  Rng rng(cfg.seed, 0);
  std::vector<DiscreteChain> chains;
  for (std::size_t c = 0; c < k; ++c) chains.push_back({pick(data, rng), 0, Rng(cfg.seed, 1 + c), {}});

  TrainingTrace trace;
  TailAverager avg(cfg.steps, cfg.average_tail);
  std::vector<double> grad(model.num_params());
  for (std::uint64_t t = 1; t <= cfg.steps; ++t) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double objective = 0;
    for (std::size_t b = 0; b < cfg.batch; ++b) {
      const auto& x = pick(data, rng);
      model.add_potential_grad(x, 1.0 / double(cfg.batch), grad);
      objective += model.potential(x) / double(cfg.batch);
    }
    AcceptanceStats stats;
    for (auto& chain : chains) {
      for (std::size_t s = 0; s < cfg.sweeps; ++s) kernel(chain);
      const double u = model.potential(chain.x);
      if (!std::isfinite(u))
        throw NumericalError("sml_train: chain diverged at step " + std::to_string(t));
      objective -= u / double(k);
      model.add_potential_grad(chain.x, -1.0 / double(k), grad);
      stats.proposed += chain.stats.proposed;
      stats.accepted += chain.stats.accepted;
    }
    add_l2(model.params(), cfg.l2, grad);
    check_finite(grad, t, "sml_train");
    const double g = schedule.gamma(t);
    apply_step(model.params(), g, grad);
    avg.observe(t, model.params().values());
    if (cfg.trace_every && t % cfg.trace_every == 0)
      trace.add({t, objective, g, stats.proposed ? stats.rate() : 1.0, zeta_value(model),
                 model.has_zeta()});
  }
  avg.finish(model.params().values());
  return trace;
}

double exact_mean_loglik(const EnergyModel& model, const DiscreteSpace& space,
                         const std::vector<Config>& data) {
  const double log_z = enumerate_log_z(model, space);
  double s = 0;
  for (const auto& x : data) s += model.potential(x) - log_z;
  return s / double(data.size());
}

double exact_mle_train(EnergyModel& model, const DiscreteSpace& space,
                       const std::vector<Config>& data, std::uint64_t steps, double lr,
                       double l2) {
  if (data.empty()) throw InvalidArgument("exact_mle_train: empty data");
  for (std::uint64_t t = 1; t <= steps; ++t) {
    auto grad = enumerate_grad_log_z(model, space);
    for (auto& g : grad) g = -g;
    for (const auto& x : data) model.add_potential_grad(x, 1.0 / double(data.size()), grad);
    add_l2(model.params(), l2, grad);
    check_finite(grad, t, "exact_mle_train");
    apply_step(model.params(), lr, grad);
  }
  return exact_mean_loglik(model, space, data);
}

TrainingTrace cd_pcd_train(Rbm& rbm, const std::vector<Config>& data, const CdConfig& cfg) {
  if (data.empty()) throw InvalidArgument("cd_pcd_train: empty data");
  if (cfg.k < 0) throw InvalidArgument("cd_pcd_train: k must be non-negative");
  const auto schedule = cfg.resolved_schedule();
  Rng rng(cfg.seed, 0);
  Rng chain_rng(cfg.seed, 1);
  const std::size_t k = cfg.chains ? cfg.chains : cfg.batch;
  std::vector<std::vector<int>> pv, ph;
  if (cfg.mode == CdMode::kPcd)
    for (std::size_t c = 0; c < k; ++c) {
      pv.push_back(pick(data, rng));
      ph.push_back(rbm.sample_hidden(pv.back(), chain_rng));
    }

  TrainingTrace trace;
  TailAverager avg(cfg.steps, cfg.average_tail);
  std::vector<double> grad(rbm.num_params());
  std::vector<Config> batch(cfg.batch), negatives;
  for (std::uint64_t t = 1; t <= cfg.steps; ++t) {
    for (auto& x : batch) x = pick(data, rng);
    negatives.clear();
    if (cfg.k > 0) {
      if (cfg.mode == CdMode::kCd) {
        for (const auto& x : batch) {
          std::vector<int> v = x, h(rbm.hidden());
          for (int s = 0; s < cfg.k; ++s) rbm.block_gibbs(v, h, chain_rng);
          negatives.push_back(v);
        }
      } else {
        for (std::size_t c = 0; c < k; ++c) {
          for (int s = 0; s < cfg.k; ++s) rbm.block_gibbs(pv[c], ph[c], chain_rng);
          negatives.push_back(pv[c]);
        }
      }
    }
    std::fill(grad.begin(), grad.end(), 0.0);
    for (const auto& x : batch) rbm.add_potential_grad(x, 1.0 / double(batch.size()), grad);
    for (const auto& x : negatives) rbm.add_potential_grad(x, -1.0 / double(negatives.size()), grad);
    add_l2(rbm.params(), cfg.l2, grad);
    check_finite(grad, t, "cd_pcd_train");
    const double g = schedule.gamma(t);
    apply_step(rbm.params(), g, grad);
    avg.observe(t, rbm.params().values());
    if (cfg.trace_every && t % cfg.trace_every == 0) {
      double obj = 0;
      for (const auto& x : batch) obj += rbm.potential(x) / double(batch.size());
      for (const auto& x : negatives) obj -= rbm.potential(x) / double(negatives.size());
      trace.add({t, obj, g, 1.0, 0.0, false});
    }
  }
  avg.finish(rbm.params().values());
  return trace;
}

// ---------------------------------------------------------------------------

double nce_posterior(double log_model, double log_noise, double nu) {
  return sigmoid(log_model - std::log(nu) - log_noise);
}

ObjectiveValue nce_objective(const EnergyModel& model, const DiscreteDistribution& noise,
                             double nu, const std::vector<Config>& positives,
                             std::span<const double> pos_weights,
                             const std::vector<Config>& negatives,
                             std::span<const double> neg_weights) {
  if (!(nu > 0)) throw InvalidArgument("NCE: nu must be positive");
  if (pos_weights.size() != positives.size() || neg_weights.size() != negatives.size())
    throw ShapeMismatch("NCE: one weight per sample");
  const double log_nu = std::log(nu);
  ObjectiveValue out;
  out.gradient.assign(model.num_params(), 0.0);
  for (std::size_t i = 0; i < positives.size(); ++i) {
    if (pos_weights[i] == 0.0) continue;
    const double lq = noise.log_prob(positives[i]);
    if (lq == kNegInf)
      throw ConsistencyViolation("NCE: noise density is zero at a data point");
    const double g = model.log_model(positives[i]) - log_nu - lq;
    out.value += pos_weights[i] * log_sigmoid(g);
    model.add_log_model_grad(positives[i], pos_weights[i] * sigmoid(-g), out.gradient);
  }
  for (std::size_t j = 0; j < negatives.size(); ++j) {
    if (neg_weights[j] == 0.0) continue;
    const double g = model.log_model(negatives[j]) - log_nu - noise.log_prob(negatives[j]);
    out.value += neg_weights[j] * log_sigmoid(-g);
    model.add_log_model_grad(negatives[j], -neg_weights[j] * sigmoid(g), out.gradient);
  }
  return out;
}

namespace {

std::vector<Config> all_states(const DiscreteSpace& space) {
  std::vector<Config> xs;
  space.for_each([&](std::span<const int> x) { xs.emplace_back(x.begin(), x.end()); });
  return xs;
}

std::vector<double> noise_table(const DiscreteSpace& space, const DiscreteDistribution& noise) {
  std::vector<double> q;
  space.for_each([&](std::span<const int> x) { q.push_back(std::exp(noise.log_prob(x))); });
  return q;
}

}  // namespace

ObjectiveValue nce_objective_exact(const EnergyModel& model, const DiscreteSpace& space,
                                   std::span<const double> data_probs,
                                   const DiscreteDistribution& noise, double nu) {
  const auto xs = all_states(space);
  if (data_probs.size() != xs.size()) throw ShapeMismatch("NCE: data table size");
  auto q = noise_table(space, noise);
  for (auto& v : q) v *= nu;
  return nce_objective(model, noise, nu, xs, data_probs, xs, q);
}

TrainingTrace nce_train(EnergyModel& model, const std::vector<Config>& data,
                        const DiscreteDistribution& noise, const NceConfig& cfg) {
  if (data.empty()) throw InvalidArgument("nce_train: empty data");
  if (!(cfg.nu >= 1)) throw InvalidArgument("nce_train: nu must be >= 1");
  if (!model.has_zeta()) model.enable_zeta(1, cfg.zeta_init);
  const auto schedule = cfg.resolved_schedule();
  const std::size_t m = std::size_t(std::llround(cfg.nu * double(cfg.batch)));
  Rng rng(cfg.seed, 0);
  Rng noise_rng(cfg.seed, 1);
  TrainingTrace trace;
  TailAverager avg(cfg.steps, cfg.average_tail);
  std::vector<Config> pos(cfg.batch), neg(m);
  const auto pw = uniform_weights(cfg.batch, 1.0);
  const auto nw = uniform_weights(m, cfg.nu);
  for (std::uint64_t t = 1; t <= cfg.steps; ++t) {
    for (auto& x : pos) x = pick(data, rng);
    for (auto& x : neg) x = noise.sample(noise_rng);
    auto obj = nce_objective(model, noise, cfg.nu, pos, pw, neg, nw);
    add_l2(model.params(), cfg.l2, obj.gradient);
    check_finite(obj.gradient, t, "nce_train");
    const double g = schedule.gamma(t);
    apply_step(model.params(), g, obj.gradient);
    avg.observe(t, model.params().values());
    if (cfg.trace_every && t % cfg.trace_every == 0)
      trace.add({t, obj.value, g, 1.0, zeta_value(model), true});
  }
  avg.finish(model.params().values());
  return trace;
}

SoftmaxTable::SoftmaxTable(DiscreteSpace space) : space_(std::move(space)) {
  space_.check_cap(kDefaultEnumerationCap);
  logits_.assign(space_.size(), 0.0);
  refresh();
}

void SoftmaxTable::refresh() { log_probs_ = log_softmax(logits_); }

Config SoftmaxTable::sample(Rng& rng) const { return space_.decode(rng.categorical_log(log_probs_)); }

double SoftmaxTable::log_prob(std::span<const int> x) const { return log_probs_[space_.encode(x)]; }

std::vector<double> SoftmaxTable::probabilities() const { return softmax(logits_); }

void SoftmaxTable::mle_step(const std::vector<Config>& batch, double lr) {
  if (batch.empty()) return;
  std::vector<double> g(logits_.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = -std::exp(log_probs_[i]);
  for (const auto& x : batch) g[space_.encode(x)] += 1.0 / double(batch.size());
  for (std::size_t i = 0; i < g.size(); ++i) logits_[i] += lr * g[i];
  refresh();
}

ObjectiveValue dnce_objective(const EnergyModel& model, const DiscreteDistribution& noise,
                              double nu, double alpha, const std::vector<Config>& data_batch,
                              const std::vector<Config>& b1, const std::vector<Config>& b2) {
  if (!(alpha > 0 && alpha < 1)) throw InvalidArgument("DNCE: alpha must lie in (0, 1)");
  if (data_batch.empty()) throw InvalidArgument("DNCE: empty data batch");
  const double w = alpha / double(data_batch.size());
  std::vector<Config> pos = data_batch;
  pos.insert(pos.end(), b1.begin(), b1.end());
  return nce_objective(model, noise, nu, pos, std::vector<double>(pos.size(), w), b2,
                       std::vector<double>(b2.size(), w));
}

ObjectiveValue dnce_objective_exact(const EnergyModel& model, const DiscreteSpace& space,
                                    std::span<const double> data_probs,
                                    const DiscreteDistribution& noise, double nu, double alpha) {
  const auto xs = all_states(space);
  if (data_probs.size() != xs.size()) throw ShapeMismatch("DNCE: data table size");
  const auto q = noise_table(space, noise);
  std::vector<double> pos(xs.size()), neg(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    pos[i] = alpha * data_probs[i] + (1 - alpha) * q[i];
    neg[i] = nu * q[i];
  }
  return nce_objective(model, noise, nu, xs, pos, xs, neg);
}

TrainingTrace dnce_train(EnergyModel& model, const std::vector<Config>& data,
                         TrainableDistribution& noise, const DnceConfig& cfg) {
  if (data.empty()) throw InvalidArgument("dnce_train: empty data");
  if (!(cfg.alpha > 0 && cfg.alpha < 1)) throw InvalidArgument("dnce_train: alpha must lie in (0, 1)");
  if (!(cfg.nu > 0)) throw InvalidArgument("dnce_train: nu must be positive");
  if (!model.has_zeta()) model.enable_zeta(1, 0.0);
  const auto schedule = cfg.resolved_schedule();
  const double d = double(cfg.batch);
  const auto n1 = std::size_t(std::llround((1 - cfg.alpha) / cfg.alpha * d));
  const auto n2 = std::size_t(std::llround(cfg.nu / cfg.alpha * d));
  Rng rng(cfg.seed, 0);
  Rng noise_rng(cfg.seed, 1);
  TrainingTrace trace;
  TailAverager avg(cfg.steps, cfg.average_tail);
  std::vector<Config> batch(cfg.batch), b1(n1), b2(n2);
  for (std::uint64_t t = 1; t <= cfg.steps; ++t) {
    for (auto& x : batch) x = pick(data, rng);
    for (auto& x : b1) x = noise.sample(noise_rng);
    for (auto& x : b2) x = noise.sample(noise_rng);
    auto obj = dnce_objective(model, noise, cfg.nu, cfg.alpha, batch, b1, b2);
    add_l2(model.params(), cfg.l2, obj.gradient);
    check_finite(obj.gradient, t, "dnce_train");
    const double g = schedule.gamma(t);
    apply_step(model.params(), g, obj.gradient);
    noise.mle_step(batch, cfg.noise_lr * g / schedule.a());
    avg.observe(t, model.params().values());
    if (cfg.trace_every && t % cfg.trace_every == 0)
      trace.add({t, obj.value, g, 1.0, zeta_value(model), true});
  }
  avg.finish(model.params().values());
  return trace;
}

// ---------------------------------------------------------------------------

ObjectiveValue conditional_nce_objective(const ConditionalEnergyModel& model,
                                         const ConditionalNoise& noise, double nu,
                                         const PairedExample& pair,
                                         const std::vector<Config>& noise_labels) {
  const double log_nu = std::log(nu);
  ObjectiveValue out;
  out.gradient.assign(model.params().size(), 0.0);
  const double lq = noise.log_prob(pair.y, pair.x);
  if (lq == kNegInf) throw ConsistencyViolation("conditional NCE: noise density is zero at a data pair");
  const double g = model.potential(pair.x, pair.y) - log_nu - lq;
  out.value += log_sigmoid(g);
  model.add_potential_grad(pair.x, pair.y, sigmoid(-g), out.gradient);
  for (const auto& y : noise_labels) {
    const double gk = model.potential(pair.x, y) - log_nu - noise.log_prob(y, pair.x);
    out.value += log_sigmoid(-gk);
    model.add_potential_grad(pair.x, y, -sigmoid(gk), out.gradient);
  }
  return out;
}

TrainingTrace conditional_nce_train(ConditionalEnergyModel& model,
                                    const std::vector<PairedExample>& pairs,
                                    const ConditionalNoise& noise, const NceConfig& cfg) {
  if (pairs.empty()) throw InvalidArgument("conditional_nce_train: empty data");
  const auto k = std::size_t(std::max<long long>(1, std::llround(cfg.nu)));
  const auto schedule = cfg.resolved_schedule();
  Rng rng(cfg.seed, 0);
  Rng noise_rng(cfg.seed, 1);
  TrainingTrace trace;
  TailAverager avg(cfg.steps, cfg.average_tail);
  std::vector<double> grad(model.params().size());
  std::vector<Config> ys(k);
  for (std::uint64_t t = 1; t <= cfg.steps; ++t) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double value = 0;
    for (std::size_t b = 0; b < cfg.batch; ++b) {
      const auto& pair = pairs[rng.uniform_int(pairs.size())];
      for (auto& y : ys) y = noise.sample(pair.x, noise_rng);
      const auto obj = conditional_nce_objective(model, noise, double(k), pair, ys);
      value += obj.value / double(cfg.batch);
      for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += obj.gradient[i] / double(cfg.batch);
    }
    add_l2(model.params(), cfg.l2, grad);
    check_finite(grad, t, "conditional_nce_train");
    const double g = schedule.gamma(t);
    apply_step(model.params(), g, grad);
    avg.observe(t, model.params().values());
    if (cfg.trace_every && t % cfg.trace_every == 0) trace.add({t, value, g, 1.0, 0.0, false});
  }
  avg.finish(model.params().values());
  return trace;
}

// ---------------------------------------------------------------------------

LatentGaussianGenerator::LatentGaussianGenerator(std::size_t latent_dim, std::size_t data_dim,
                                                 std::vector<std::size_t> hidden, double sigma)
    : dh_(latent_dim), dx_(data_dim), sigma_(sigma) {
  if (!(sigma > 0)) throw InvalidArgument("generator: sigma must be positive");
  std::vector<std::size_t> sizes = {latent_dim};
  std::vector<Activation> acts;
  for (auto h : hidden) sizes.push_back(h), acts.push_back(Activation::kTanh);
  sizes.push_back(data_dim);
  acts.push_back(Activation::kIdentity);
  net_ = DenseNet(sizes, acts);
  net_.add_blocks(params_, "decoder");
}

void LatentGaussianGenerator::init(Rng& rng, double scale) { net_.init(params_.values(), rng, scale); }

std::vector<double> LatentGaussianGenerator::decode(std::span<const double> h) const {
  return net_.output(params_.values(), h);
}

std::vector<double> LatentGaussianGenerator::sample(Rng& rng, std::vector<double>& h) const {
  h.resize(dh_);
  for (auto& v : h) v = rng.normal();
  auto x = decode(h);
  for (auto& v : x) v += sigma_ * rng.normal();
  return x;
}

double LatentGaussianGenerator::log_joint(std::span<const double> h, std::span<const double> x) const {
  const auto g = decode(h);
  double s = 0;
  for (double v : h) s -= 0.5 * v * v;
  for (std::size_t i = 0; i < dx_; ++i) s -= 0.5 * (x[i] - g[i]) * (x[i] - g[i]) / (sigma_ * sigma_);
  return s - 0.5 * double(dh_ + dx_) * std::log(2 * M_PI) - double(dx_) * std::log(sigma_);
}

std::vector<double> LatentGaussianGenerator::grad_x_log_joint(std::span<const double> h,
                                                              std::span<const double> x) const {
  const auto g = decode(h);
  std::vector<double> out(dx_);
  for (std::size_t i = 0; i < dx_; ++i) out[i] = -(x[i] - g[i]) / (sigma_ * sigma_);
  return out;
}

std::vector<double> LatentGaussianGenerator::grad_h_log_joint(std::span<const double> h,
                                                              std::span<const double> x) const {
  const auto acts = net_.forward(params_.values(), h);
  std::vector<double> r(dx_);
  for (std::size_t i = 0; i < dx_; ++i) r[i] = (x[i] - acts.output()[i]) / (sigma_ * sigma_);
  std::vector<double> scratch(params_.size(), 0.0);
  auto out = net_.backward(params_.values(), acts, r, scratch);
  for (std::size_t j = 0; j < dh_; ++j) out[j] -= h[j];
  return out;
}

void LatentGaussianGenerator::add_param_grad(std::span<const double> h, std::span<const double> x,
                                             double scale, std::span<double> grad) const {
  const auto acts = net_.forward(params_.values(), h);
  std::vector<double> r(dx_);
  for (std::size_t i = 0; i < dx_; ++i) r[i] = (x[i] - acts.output()[i]) / (sigma_ * sigma_);
  net_.backward(params_.values(), acts, r, grad, scale);
}

RevisedSample revise_sample(const ContinuousEnergyModel& ebm, const LatentGaussianGenerator& gen,
                            std::size_t steps, const SgldSchedule& schedule, Rng& rng,
                            std::size_t inner_steps) {
  RevisedSample s;
  s.x = gen.sample(rng, s.h);
  std::vector<double> gu(s.x.size());
  std::vector<double> h_star = s.h;
  for (std::size_t l = 1; l <= steps; ++l) {
    const double delta = schedule.step(l);
    h_star = s.h;
    if (l > 1)
      for (std::size_t k = 0; k < inner_steps; ++k) {
        const auto gh = gen.grad_h_log_joint(h_star, s.x);
        for (std::size_t j = 0; j < h_star.size(); ++j)
          h_star[j] += delta * gh[j] + std::sqrt(2 * delta) * rng.normal();
      }
    ebm.grad_x(s.x, gu);
    const auto gx_h = gen.grad_x_log_joint(s.h, s.x);
    const auto gx_star = gen.grad_x_log_joint(h_star, s.x);
    const auto gh = gen.grad_h_log_joint(s.h, s.x);
    for (std::size_t i = 0; i < s.x.size(); ++i)
      s.x[i] += delta * (gu[i] + gx_h[i] - gx_star[i]) + std::sqrt(2 * delta) * rng.normal();
    for (std::size_t j = 0; j < s.h.size(); ++j)
      s.h[j] += delta * gh[j] + std::sqrt(2 * delta) * rng.normal();
    for (double v : s.x)
      if (!std::isfinite(v)) throw NumericalError("sample revision diverged at step " + std::to_string(l));
  }
  return s;
}

TrainingTrace inclusive_nrf_train(ContinuousEnergyModel& ebm, LatentGaussianGenerator& gen,
                                  const std::vector<std::vector<double>>& data,
                                  const InclusiveNrfConfig& cfg) {
  if (data.empty()) throw InvalidArgument("inclusive_nrf_train: empty data");
  const auto schedule = cfg.resolved_schedule();
  Rng rng(cfg.seed, 0);
  Rng sampler_rng(cfg.seed, 1);
  TrainingTrace trace;
  // Only theta is averaged: the generator is identified up to a rotation of h,
  // so averaging its weights would shrink the decoder.
  TailAverager avg(cfg.steps, cfg.average_tail);
  std::vector<double> gt(ebm.params().size()), gp(gen.params().size());
  const double w = 1.0 / double(cfg.batch);
  for (std::uint64_t t = 1; t <= cfg.steps; ++t) {
    std::fill(gt.begin(), gt.end(), 0.0);
    std::fill(gp.begin(), gp.end(), 0.0);
    double objective = 0;
    for (std::size_t b = 0; b < cfg.batch; ++b) {
      const auto& xt = data[rng.uniform_int(data.size())];
      const auto s =
          revise_sample(ebm, gen, cfg.revision_steps, cfg.revision, sampler_rng, cfg.inner_steps);
      ebm.add_potential_grad(xt, w, gt);
      ebm.add_potential_grad(s.x, -w, gt);
      gen.add_param_grad(s.h, s.x, w, gp);
      objective += w * (ebm.potential(xt) - ebm.potential(s.x));
    }
    add_l2(ebm.params(), cfg.l2, gt);
    check_finite(gt, t, "inclusive_nrf_train");
    check_finite(gp, t, "inclusive_nrf_train");
    const double g = schedule.gamma(t);
    apply_step(ebm.params(), g, gt);
    apply_step(gen.params(), g * cfg.generator_lr_scale, gp);
    avg.observe(t, ebm.params().values());
    if (cfg.trace_every && t % cfg.trace_every == 0) trace.add({t, objective, g, 1.0, 0.0, false});
  }
  avg.finish(ebm.params().values());
  return trace;
}

}  // namespace ebm
