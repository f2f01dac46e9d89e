// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ebm/discrete_space.hpp"
#include "ebm/energy_model.hpp"
#include "ebm/rng.hpp"

namespace ebm {

struct AcceptanceStats {
  std::uint64_t proposed = 0;
  std::uint64_t accepted = 0;
  double rate() const { return proposed ? double(accepted) / double(proposed) : 0.0; }
};

template <class State>
struct ChainState {
  State x;
  std::uint64_t step = 0;
  Rng rng;
  AcceptanceStats stats;
};

using DiscreteChain = ChainState<Config>;
using ContinuousChain = ChainState<std::vector<double>>;

// A normalized distribution over configurations that can be sampled and scored.
class DiscreteDistribution {
 public:
  virtual ~DiscreteDistribution() = default;
  virtual Config sample(Rng& rng) const = 0;
  virtual double log_prob(std::span<const int> x) const = 0;
  // log q~(x); defaults to the normalized density.
  virtual double log_unnormalized(std::span<const int> x) const { return log_prob(x); }
};

// q(x'|x) with pointwise log-density.
class Proposal {
 public:
  virtual ~Proposal() = default;
  virtual Config sample(std::span<const int> from, Rng& rng) const = 0;
  virtual double log_density(std::span<const int> to, std::span<const int> from) const = 0;
  virtual bool independent() const { return false; }
};

// x' ~ q, ignoring the current state.
class IndependentProposal : public Proposal {
 public:
  explicit IndependentProposal(const DiscreteDistribution& q) : q_(q) {}
  Config sample(std::span<const int>, Rng& rng) const override { return q_.sample(rng); }
  double log_density(std::span<const int> to, std::span<const int>) const override {
    return q_.log_prob(to);
  }
  bool independent() const override { return true; }

 private:
  const DiscreteDistribution& q_;
};

// Picks one coordinate uniformly and redraws it uniformly among its other
// values. Symmetric.
class SingleSiteProposal : public Proposal {
 public:
  explicit SingleSiteProposal(std::vector<int> cardinalities) : cards_(std::move(cardinalities)) {}
  Config sample(std::span<const int> from, Rng& rng) const override;
  double log_density(std::span<const int> to, std::span<const int> from) const override;

 private:
  std::vector<int> cards_;
};

// log of the MH acceptance probability for moving x -> x'.
double mh_log_acceptance(const EnergyModel& target, const Proposal& proposal,
                         std::span<const int> x, std::span<const int> x_new);

// One propose/accept step. Returns true on acceptance.
bool mh_step(const EnergyModel& target, const Proposal& proposal, DiscreteChain& chain);

// MH with a state-independent proposal, accepting with min{1, w(x')/w(x)}
// where w = p~/q.
bool mis_step(const EnergyModel& target, const Proposal& independent_proposal,
              DiscreteChain& chain);

// Exact conditionals p(x_i | x_rest) for Gibbs sampling.
class FullConditionals {
 public:
  virtual ~FullConditionals() = default;
  virtual std::size_t num_sites() const = 0;
  virtual const std::vector<int>& site_values(std::size_t site) const = 0;
  // Unnormalized log-probabilities for each value of the site.
  virtual void conditional_log_weights(std::span<const int> x, std::size_t site,
                                       std::span<double> out) const = 0;
};

// Conditionals of any EnergyModel on a product space, by evaluating U at each
// value of the site.
class EnumeratedConditionals : public FullConditionals {
 public:
  EnumeratedConditionals(const EnergyModel& model, const DiscreteSpace& space);
  std::size_t num_sites() const override { return space_.num_axes(); }
  const std::vector<int>& site_values(std::size_t site) const override {
    return space_.axis_values(site);
  }
  void conditional_log_weights(std::span<const int> x, std::size_t site,
                               std::span<double> out) const override;

 private:
  const EnergyModel& model_;
  DiscreteSpace space_;
};

enum class ScanOrder { kAscending, kRandom };

// One sweep: every site is redrawn from its exact conditional, using the
// freshest values of the others.
void gibbs_sweep(const FullConditionals& target, DiscreteChain& chain,
                 ScanOrder order = ScanOrder::kAscending);

// Per-coordinate proposal q(v | x, i).
class CoordinateProposal {
 public:
  virtual ~CoordinateProposal() = default;
  virtual int sample(std::span<const int> x, std::size_t site, Rng& rng) const = 0;
  virtual double log_density(int value, std::span<const int> x, std::size_t site) const = 0;
};

// Acceptance for replacing x_i by v with the other coordinates clamped.
double mh_within_gibbs_log_acceptance(const EnergyModel& target, const CoordinateProposal& q,
                                      std::span<const int> x, std::size_t site, int value);

void mh_within_gibbs_sweep(const EnergyModel& target, const CoordinateProposal& proposal,
                           DiscreteChain& chain);

// log N(to; from + (sigma^2/2) grad(from), sigma^2 I).
double langevin_log_density(std::span<const double> to, std::span<const double> from,
                            std::span<const double> grad_from, double sigma);

// Langevin proposal corrected by MH.
bool mala_step(const ContinuousEnergyModel& target, ContinuousChain& chain, double sigma);

// delta_l = a * (b + l)^(-power), with power in (1/2, 1] so that the sum of
// steps diverges and the sum of squares converges. fixed() gives a constant
// step, which only the diagnostics use.
class SgldSchedule {
 public:
  static SgldSchedule decay(double a, double b, double power);
  static SgldSchedule fixed(double delta);
  double step(std::uint64_t l) const;
  bool decaying() const { return decaying_; }

 private:
  double a_ = 0, b_ = 0, power_ = 0;
  bool decaying_ = true;
};

using StochasticGrad = std::function<void(std::span<const double> z, Rng& rng, std::span<double> out)>;

// z_l = z_{l-1} + delta_l * grad + sqrt(2 delta_l) * eta, for l = 1..steps.
// visit(l, z) sees every iterate.
void sgld_run(const StochasticGrad& grad, std::vector<double>& z, const SgldSchedule& schedule,
              std::uint64_t steps, Rng& rng,
              const std::function<void(std::uint64_t, std::span<const double>)>& visit = {});

struct WeightedSample {
  Config x;
  double log_weight = 0.0;  // log p~(x) - log q~(x)
};

std::vector<WeightedSample> draw_weighted(const EnergyModel& target,
                                          const DiscreteDistribution& proposal, std::size_t m,
                                          Rng& rng);

struct SnisResult {
  double estimate = 0.0;
  double ess = 0.0;  // M / (1 + var(M * omega))
};

SnisResult snis_estimate(const EnergyModel& target, const DiscreteDistribution& proposal,
                         const std::function<double(std::span<const int>)>& statistic,
                         std::size_t m, Rng& rng);
// Same estimate from already drawn samples.
SnisResult snis_from_samples(const std::vector<WeightedSample>& samples,
                             const std::function<double(std::span<const int>)>& statistic);

// Unbiased (1/M) sum p~/q~ for Z_p / Z_q.
double is_z_ratio(const EnergyModel& target, const DiscreteDistribution& proposal, std::size_t m,
                  Rng& rng);

// Runs `kernel` for `steps` transitions and keeps states after burn-in,
// every `thin`-th one.
std::vector<Config> collect_samples(const std::function<void(DiscreteChain&)>& kernel,
                                    DiscreteChain& chain, std::uint64_t steps,
                                    double burn_in_fraction = 0.1, std::uint64_t thin = 1);

// Header "# model=<id> seed=<seed>", then one configuration per line.
void write_sample_dump(std::ostream& out, const std::string& model_id, std::uint64_t seed,
                       const std::vector<Config>& samples);
void write_sample_dump(std::ostream& out, const std::string& model_id, std::uint64_t seed,
                       const std::vector<std::vector<double>>& samples);

}  // namespace ebm
