// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "ebm/discrete_space.hpp"
#include "ebm/energy_model.hpp"
#include "ebm/models/rbm.hpp"
#include "ebm/samplers.hpp"
#include "ebm/tiny_net.hpp"

namespace ebm {

// gamma_t = a for t < t0, a * b / (b + t - t0) afterwards (t counts from 1).
class SaSchedule {
 public:
  SaSchedule() = default;
  SaSchedule(double a, double b, double t0);
  static SaSchedule constant(double a);
  // Constant a for the first 30% of `steps`, then a * b / (b + t - t0) with b = t0.
  static SaSchedule default_for(std::uint64_t steps, double a = 0.1);

  double gamma(std::uint64_t t) const;
  double a() const { return a_; }
  double b() const { return b_; }
  double t0() const { return t0_; }

 private:
  double a_ = 0.1, b_ = 1.0, t0_ = 0.0;
};

struct TraceRow {
  std::uint64_t step = 0;
  double objective = 0.0;
  double gamma = 0.0;
  double acceptance = 1.0;
  double zeta = 0.0;
  bool has_zeta = false;
};

class TrainingTrace {
 public:
  void add(const TraceRow& row) { rows_.push_back(row); }
  const std::vector<TraceRow>& rows() const { return rows_; }
  // Columns: step,objective,gamma,acceptance,zeta (zeta empty when absent).
  void write_csv(std::ostream& out) const;

 private:
  std::vector<TraceRow> rows_;
};

// Settings shared by the stochastic learners.
struct LearnConfig {
  std::uint64_t steps = 1000;
  std::size_t batch = 10;
  std::optional<SaSchedule> schedule;  // default: SaSchedule::default_for(steps)
  double l2 = 1e-3;                    // rho; never applied to zeta
  double average_tail = 0.0;           // Polyak-average the final fraction of iterates
  std::uint64_t seed = 0;
  std::uint64_t trace_every = 0;       // 0: no trace rows
  SaSchedule resolved_schedule() const;
};

// ---------------------------------------------------------------------------
// Generic stochastic approximation.

// Draws fresh Monte Carlo samples given lambda and writes F(lambda, z).
using SaUpdateFn =
    std::function<void(std::span<const double> lambda, Rng& rng, std::span<double> update)>;

struct SaConfig {
  std::uint64_t steps = 1000;
  SaSchedule schedule;
  std::size_t moves = 1;  // K draws of F averaged per update
  double average_tail = 0.0;
  std::uint64_t seed = 0;
};

// lambda_t = lambda_{t-1} + gamma_t * mean_k F(lambda_{t-1}, z_k). Throws
// NumericalError naming the step if an update is not finite.
std::vector<double> sa_run(std::vector<double> lambda, const SaUpdateFn& update,
                           const SaConfig& cfg);

// ---------------------------------------------------------------------------
// Maximum likelihood by sampling.

using DiscreteKernel = std::function<void(DiscreteChain&)>;

// mean_data dU/dtheta - mean_negatives dU/dtheta.
std::vector<double> sml_gradient_estimate(const EnergyModel& model, const std::vector<Config>& data,
                                          const std::vector<Config>& negatives);

struct SmlConfig : LearnConfig {
  std::size_t chains = 0;  // 0: same as batch
  std::size_t sweeps = 1;  // kernel applications per update
};

// Persistent-chain SML. The kernel must leave p_theta invariant for the
// parameters it reads at call time. Chains start at data points and are
// never reset.
TrainingTrace sml_train(EnergyModel& model, const std::vector<Config>& data,
                        const DiscreteKernel& kernel, const SmlConfig& cfg);

// Exact-gradient ascent on the mean log-likelihood (minus l2/2 |theta|^2),
// enumerating `space`. Returns the final mean log-likelihood.
double exact_mle_train(EnergyModel& model, const DiscreteSpace& space,
                       const std::vector<Config>& data, std::uint64_t steps, double lr,
                       double l2 = 0.0);

double exact_mean_loglik(const EnergyModel& model, const DiscreteSpace& space,
                         const std::vector<Config>& data);

enum class CdMode { kCd, kPcd };

struct CdConfig : LearnConfig {
  int k = 1;
  CdMode mode = CdMode::kPcd;
  std::size_t chains = 0;  // PCD only; 0: same as batch
};

// Contrastive divergence. CD restarts k block-Gibbs steps at each minibatch
// point; PCD keeps persistent (v, h) chains. k = 0 drops the negative phase.
TrainingTrace cd_pcd_train(Rbm& rbm, const std::vector<Config>& data, const CdConfig& cfg);

// ---------------------------------------------------------------------------
// Noise-contrastive estimation.

// p(C=+|x) = p(x) / (p(x) + nu q(x)) from log p and log q.
double nce_posterior(double log_model, double log_noise, double nu);

// sum_i pos_w[i] log p(C=+|pos_i) + sum_j neg_w[j] log p(C=-|neg_j), with its
// gradient in (theta, zeta). Throws ConsistencyViolation if the noise has zero
// density at a positive sample.
ObjectiveValue nce_objective(const EnergyModel& model, const DiscreteDistribution& noise,
                             double nu, const std::vector<Config>& positives,
                             std::span<const double> pos_weights,
                             const std::vector<Config>& negatives,
                             std::span<const double> neg_weights);

// J_NCE in closed form over an enumerable space for a given data table.
ObjectiveValue nce_objective_exact(const EnergyModel& model, const DiscreteSpace& space,
                                   std::span<const double> data_probs,
                                   const DiscreteDistribution& noise, double nu);

struct NceConfig : LearnConfig {
  double nu = 10.0;
  double zeta_init = 0.0;
};

// Adds a single zeta slot (at zeta_init) when the model has none.
TrainingTrace nce_train(EnergyModel& model, const std::vector<Config>& data,
                        const DiscreteDistribution& noise, const NceConfig& cfg);

// A noise distribution whose parameters are fit by maximum likelihood.
class TrainableDistribution : public DiscreteDistribution {
 public:
  // One ascent step on the mean log-likelihood of the batch.
  virtual void mle_step(const std::vector<Config>& batch, double lr) = 0;
};

// Softmax over all states of an enumerable space.
class SoftmaxTable : public TrainableDistribution {
 public:
  explicit SoftmaxTable(DiscreteSpace space);
  Config sample(Rng& rng) const override;
  double log_prob(std::span<const int> x) const override;
  void mle_step(const std::vector<Config>& batch, double lr) override;
  std::span<double> logits() { return logits_; }
  std::vector<double> probabilities() const;

 private:
  void refresh();
  DiscreteSpace space_;
  std::vector<double> logits_, log_probs_;
};

struct DnceConfig : LearnConfig {
  double alpha = 0.5;
  double nu = 4.0;
  double noise_lr = 0.5;
};

// One DNCE minibatch objective: D and B1 are positives, B2 negatives, all with
// weight alpha / |D|.
ObjectiveValue dnce_objective(const EnergyModel& model, const DiscreteDistribution& noise,
                              double nu, double alpha, const std::vector<Config>& data_batch,
                              const std::vector<Config>& b1, const std::vector<Config>& b2);

// J_DNCE in closed form: positives from alpha * data + (1 - alpha) * q.
ObjectiveValue dnce_objective_exact(const EnergyModel& model, const DiscreteSpace& space,
                                    std::span<const double> data_probs,
                                    const DiscreteDistribution& noise, double nu, double alpha);

TrainingTrace dnce_train(EnergyModel& model, const std::vector<Config>& data,
                         TrainableDistribution& noise, const DnceConfig& cfg);

// ---------------------------------------------------------------------------
// Conditional NCE: p~(y|x) = exp U(x, y) without per-x normalizers.

class ConditionalEnergyModel {
 public:
  virtual ~ConditionalEnergyModel() = default;
  virtual double potential(std::span<const int> x, std::span<const int> y) const = 0;
  virtual void add_potential_grad(std::span<const int> x, std::span<const int> y, double scale,
                                  std::span<double> grad) const = 0;
  ParamVector& params() { return params_; }
  const ParamVector& params() const { return params_; }

 protected:
  ParamVector params_;
};

class ConditionalNoise {
 public:
  virtual ~ConditionalNoise() = default;
  virtual Config sample(std::span<const int> x, Rng& rng) const = 0;
  virtual double log_prob(std::span<const int> y, std::span<const int> x) const = 0;
};

struct PairedExample {
  Config x, y;
};

// log p(+|x,y) + sum_k log p(-|x,y_k) for one pair and its noise labels.
ObjectiveValue conditional_nce_objective(const ConditionalEnergyModel& model,
                                         const ConditionalNoise& noise, double nu,
                                         const PairedExample& pair,
                                         const std::vector<Config>& noise_labels);

// nu noise labels per pair (nu rounded to an integer >= 1).
TrainingTrace conditional_nce_train(ConditionalEnergyModel& model,
                                    const std::vector<PairedExample>& pairs,
                                    const ConditionalNoise& noise, const NceConfig& cfg);

// ---------------------------------------------------------------------------
// Inclusive-NRF with a latent-variable generator.

// h ~ N(0, I), x = g(h) + eps with eps ~ N(0, sigma^2 I), g a DenseNet.
class LatentGaussianGenerator {
 public:
  LatentGaussianGenerator(std::size_t latent_dim, std::size_t data_dim,
                          std::vector<std::size_t> hidden = {}, double sigma = 0.1);

  std::size_t latent_dim() const { return dh_; }
  std::size_t data_dim() const { return dx_; }
  double sigma() const { return sigma_; }
  ParamVector& params() { return params_; }
  const ParamVector& params() const { return params_; }
  void init(Rng& rng, double scale = 0.1);

  std::vector<double> decode(std::span<const double> h) const;
  // Ancestral sample; returns x and writes h.
  std::vector<double> sample(Rng& rng, std::vector<double>& h) const;
  double log_joint(std::span<const double> h, std::span<const double> x) const;
  std::vector<double> grad_x_log_joint(std::span<const double> h, std::span<const double> x) const;
  std::vector<double> grad_h_log_joint(std::span<const double> h, std::span<const double> x) const;
  void add_param_grad(std::span<const double> h, std::span<const double> x, double scale,
                      std::span<double> grad) const;

 private:
  std::size_t dh_, dx_;
  double sigma_;
  DenseNet net_;
  ParamVector params_;
};

struct RevisedSample {
  std::vector<double> x, h;
};

// Ancestral proposal followed by `steps` SGLD revision steps in (x, h). For
// l > 1, h* comes from `inner_steps` LD steps on q(h|x) started at h, with
// delta* = delta_l; at l = 1 the proposal's own h is used. steps = 0 returns
// raw generator samples.
RevisedSample revise_sample(const ContinuousEnergyModel& ebm, const LatentGaussianGenerator& gen,
                            std::size_t steps, const SgldSchedule& schedule, Rng& rng,
                            std::size_t inner_steps = 1);

struct InclusiveNrfConfig : LearnConfig {
  std::size_t revision_steps = 1;
  SgldSchedule revision = SgldSchedule::fixed(0.01);
  std::size_t inner_steps = 1;
  double generator_lr_scale = 0.01;  // generator step = scale * gamma_t
};

TrainingTrace inclusive_nrf_train(ContinuousEnergyModel& ebm, LatentGaussianGenerator& gen,
                                  const std::vector<std::vector<double>>& data,
                                  const InclusiveNrfConfig& cfg);

}  // namespace ebm
