// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ebm/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "ebm/error.hpp"
#include "ebm/numeric.hpp"

namespace ebm {

Config SingleSiteProposal::sample(std::span<const int> from, Rng& rng) const {
  Config x(from.begin(), from.end());
  if (x.size() != cards_.size()) throw ShapeMismatch("SingleSiteProposal: wrong arity");
  const std::size_t site = rng.uniform_int(cards_.size());
  if (cards_[site] < 2) return x;
  int v = static_cast<int>(rng.uniform_int(cards_[site] - 1));
  if (v >= x[site]) ++v;
  x[site] = v;
  return x;
}

double SingleSiteProposal::log_density(std::span<const int> to, std::span<const int> from) const {
  std::size_t diff = 0, site = 0;
  for (std::size_t i = 0; i < to.size(); ++i)
    if (to[i] != from[i]) {
      ++diff;
      site = i;
    }
  if (diff != 1) return kNegInf;
  return -std::log(double(cards_.size())) - std::log(double(cards_[site] - 1));
}

double mh_log_acceptance(const EnergyModel& target, const Proposal& proposal,
                         std::span<const int> x, std::span<const int> x_new) {
  const double fwd = proposal.log_density(x_new, x);
  const double rev = proposal.log_density(x, x_new);
  if (!std::isfinite(fwd) || !std::isfinite(rev))
    throw InvalidProposal("proposal density is zero at a required endpoint");
  const double r = target.potential(x_new) - target.potential(x) + rev - fwd;
  return std::min(0.0, r);
}

namespace {

bool accept(double log_a, DiscreteChain& chain) {
  ++chain.stats.proposed;
  if (log_a >= 0.0 || std::log(chain.rng.uniform()) < log_a) {
    ++chain.stats.accepted;
    return true;
  }
  return false;
}

}  // namespace

bool mh_step(const EnergyModel& target, const Proposal& proposal, DiscreteChain& chain) {
  Config x_new = proposal.sample(chain.x, chain.rng);
  const double log_a = mh_log_acceptance(target, proposal, chain.x, x_new);
  ++chain.step;
  if (!accept(log_a, chain)) return false;
  chain.x = std::move(x_new);
  return true;
}

bool mis_step(const EnergyModel& target, const Proposal& proposal, DiscreteChain& chain) {
  if (!proposal.independent()) throw InvalidArgument("mis_step needs an independent proposal");
  Config x_new = proposal.sample(chain.x, chain.rng);
  const double q_new = proposal.log_density(x_new, chain.x);
  const double q_old = proposal.log_density(chain.x, x_new);
  if (!std::isfinite(q_new) || !std::isfinite(q_old))
    throw InvalidProposal("proposal density is zero at a required endpoint");
  const double log_w_new = target.potential(x_new) - q_new;
  const double log_w_old = target.potential(chain.x) - q_old;
  ++chain.step;
  if (!accept(std::min(0.0, log_w_new - log_w_old), chain)) return false;
  chain.x = std::move(x_new);
  return true;
}

EnumeratedConditionals::EnumeratedConditionals(const EnergyModel& model, const DiscreteSpace& space)
    : model_(model), space_(space) {
  if (space.trans_dimensional()) throw InvalidArgument("Gibbs needs a fixed-dimensional space");
}

void EnumeratedConditionals::conditional_log_weights(std::span<const int> x, std::size_t site,
                                                     std::span<double> out) const {
  Config y(x.begin(), x.end());
  const auto& vals = space_.axis_values(site);
  for (std::size_t k = 0; k < vals.size(); ++k) {
    y[site] = vals[k];
    out[k] = model_.potential(y);
  }
}

void gibbs_sweep(const FullConditionals& target, DiscreteChain& chain, ScanOrder order) {
  const std::size_t n = target.num_sites();
  std::vector<double> w;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t site = order == ScanOrder::kAscending ? i : chain.rng.uniform_int(n);
    const auto& vals = target.site_values(site);
    w.resize(vals.size());
    target.conditional_log_weights(chain.x, site, w);
    chain.x[site] = vals[chain.rng.categorical_log(w)];
  }
  ++chain.step;
}

double mh_within_gibbs_log_acceptance(const EnergyModel& target, const CoordinateProposal& q,
                                      std::span<const int> x, std::size_t site, int value) {
  Config y(x.begin(), x.end());
  y[site] = value;
  const double fwd = q.log_density(value, x, site);
  const double rev = q.log_density(x[site], y, site);
  if (!std::isfinite(fwd) || !std::isfinite(rev))
    throw InvalidProposal("coordinate proposal density is zero at a required endpoint");
  return std::min(0.0, target.potential(y) - target.potential(x) + rev - fwd);
}

void mh_within_gibbs_sweep(const EnergyModel& target, const CoordinateProposal& proposal,
                           DiscreteChain& chain) {
  for (std::size_t site = 0; site < chain.x.size(); ++site) {
    const int v = proposal.sample(chain.x, site, chain.rng);
    const double log_a = mh_within_gibbs_log_acceptance(target, proposal, chain.x, site, v);
    if (accept(log_a, chain)) chain.x[site] = v;
  }
  ++chain.step;
}

double langevin_log_density(std::span<const double> to, std::span<const double> from,
                            std::span<const double> grad_from, double sigma) {
  const double s2 = sigma * sigma;
  double q = 0.0;
  for (std::size_t i = 0; i < to.size(); ++i) {
    const double d = to[i] - from[i] - 0.5 * s2 * grad_from[i];
    q += d * d;
  }
  return -q / (2 * s2) - 0.5 * double(to.size()) * std::log(2 * M_PI * s2);
}

namespace {
void check_finite(std::span<const double> v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x)) throw NumericalError(std::string(what) + ": non-finite gradient");
}
}  // namespace

bool mala_step(const ContinuousEnergyModel& target, ContinuousChain& chain, double sigma) {
  if (!(sigma > 0)) throw InvalidArgument("mala_step: sigma must be positive");
  const std::size_t d = chain.x.size();
  std::vector<double> g0(d), g1(d), y(d);
  target.grad_x(chain.x, g0);
  check_finite(g0, "mala_step");
  for (std::size_t i = 0; i < d; ++i)
    y[i] = chain.x[i] + 0.5 * sigma * sigma * g0[i] + sigma * chain.rng.normal();
  target.grad_x(y, g1);
  check_finite(g1, "mala_step");
  const double log_a = target.potential(y) - target.potential(chain.x) +
                       langevin_log_density(chain.x, y, g1, sigma) -
                       langevin_log_density(y, chain.x, g0, sigma);
  ++chain.step;
  ++chain.stats.proposed;
  if (log_a >= 0.0 || std::log(chain.rng.uniform()) < log_a) {
    ++chain.stats.accepted;
    chain.x = std::move(y);
    return true;
  }
  return false;
}

SgldSchedule SgldSchedule::decay(double a, double b, double power) {
  if (!(a > 0) || !(b > 0) || !(power > 0.5 && power <= 1.0))
    throw InvalidArgument("SGLD schedule needs a > 0, b > 0 and power in (0.5, 1]");
  SgldSchedule s;
  s.a_ = a;
  s.b_ = b;
  s.power_ = power;
  return s;
}

SgldSchedule SgldSchedule::fixed(double delta) {
  if (!(delta > 0)) throw InvalidArgument("SGLD step must be positive");
  SgldSchedule s;
  s.a_ = delta;
  s.decaying_ = false;
  return s;
}

double SgldSchedule::step(std::uint64_t l) const {
  return decaying_ ? a_ * std::pow(b_ + double(l), -power_) : a_;
}

void sgld_run(const StochasticGrad& grad, std::vector<double>& z, const SgldSchedule& schedule,
              std::uint64_t steps, Rng& rng,
              const std::function<void(std::uint64_t, std::span<const double>)>& visit) {
  std::vector<double> g(z.size());
  for (std::uint64_t l = 1; l <= steps; ++l) {
    std::fill(g.begin(), g.end(), 0.0);
    grad(z, rng, g);
    const double delta = schedule.step(l), noise = std::sqrt(2 * delta);
    for (std::size_t i = 0; i < z.size(); ++i) {
      z[i] += delta * g[i] + noise * rng.normal();
      if (!std::isfinite(z[i])) throw NumericalError("sgld_run: iterate diverged at step " + std::to_string(l));
    }
    if (visit) visit(l, z);
  }
}

std::vector<WeightedSample> draw_weighted(const EnergyModel& target,
                                          const DiscreteDistribution& proposal, std::size_t m,
                                          Rng& rng) {
  std::vector<WeightedSample> out;
  out.reserve(m);
  for (std::size_t j = 0; j < m; ++j) {
    Config x = proposal.sample(rng);
    const double lw = target.potential(x) - proposal.log_unnormalized(x);
    out.push_back({std::move(x), lw});
  }
  return out;
}

SnisResult snis_from_samples(const std::vector<WeightedSample>& samples,
                             const std::function<double(std::span<const int>)>& statistic) {
  if (samples.empty()) throw InvalidArgument("snis: need at least one sample");
  LogSumExp acc;
  for (const auto& s : samples) acc.add(s.log_weight);
  const double log_total = acc.value();
  if (log_total == kNegInf) throw NumericalError("snis: all importance weights are zero");
  const double m = double(samples.size());
  double est = 0.0, wsum = 0.0, var = 0.0;
  std::vector<double> omega(samples.size());
  for (std::size_t j = 0; j < samples.size(); ++j) {
    omega[j] = std::exp(samples[j].log_weight - log_total);
    wsum += omega[j];
  }
  // Dividing once at the end makes a constant statistic come out exact.
  for (std::size_t j = 0; j < samples.size(); ++j) est += omega[j] * statistic(samples[j].x);
  est /= wsum;
  for (double w : omega) var += (m * w - 1.0) * (m * w - 1.0);
  return {est, m / (1.0 + var / m)};
}

SnisResult snis_estimate(const EnergyModel& target, const DiscreteDistribution& proposal,
                         const std::function<double(std::span<const int>)>& statistic,
                         std::size_t m, Rng& rng) {
  return snis_from_samples(draw_weighted(target, proposal, m, rng), statistic);
}

double is_z_ratio(const EnergyModel& target, const DiscreteDistribution& proposal, std::size_t m,
                  Rng& rng) {
  if (m == 0) throw InvalidArgument("is_z_ratio: need at least one sample");
  double s = 0.0;
  for (const auto& w : draw_weighted(target, proposal, m, rng)) s += std::exp(w.log_weight);
  return s / double(m);
}

std::vector<Config> collect_samples(const std::function<void(DiscreteChain&)>& kernel,
                                    DiscreteChain& chain, std::uint64_t steps,
                                    double burn_in_fraction, std::uint64_t thin) {
  if (thin == 0) throw InvalidArgument("collect_samples: thin must be >= 1");
  const auto burn = static_cast<std::uint64_t>(burn_in_fraction * double(steps));
  std::vector<Config> out;
  out.reserve((steps - std::min(steps, burn)) / thin + 1);
  for (std::uint64_t t = 0; t < steps; ++t) {
    kernel(chain);
    if (t >= burn && (t - burn) % thin == 0) out.push_back(chain.x);
  }
  return out;
}

void write_sample_dump(std::ostream& out, const std::string& model_id, std::uint64_t seed,
                       const std::vector<Config>& samples) {
  out << "# model=" << model_id << " seed=" << seed << '\n';
  for (const auto& x : samples) {
    for (std::size_t i = 0; i < x.size(); ++i) out << (i ? " " : "") << x[i];
    out << '\n';
  }
}

void write_sample_dump(std::ostream& out, const std::string& model_id, std::uint64_t seed,
                       const std::vector<std::vector<double>>& samples) {
  out << "# model=" << model_id << " seed=" << seed << '\n';
  const auto old = out.precision(17);
  for (const auto& x : samples) {
    for (std::size_t i = 0; i < x.size(); ++i) out << (i ? " " : "") << x[i];
    out << '\n';
  }
  out.precision(old);
}

}  // namespace ebm
