// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ebm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "ebm/error.hpp"
#include "ebm/numeric.hpp"

namespace ebm {

namespace {

// Runs body(begin, end, shard) over `threads` contiguous shards.
template <class Body>
void sharded(std::uint64_t n, unsigned threads, Body&& body) {
  threads = std::max(1u, threads);
  if (threads == 1 || n < 1024) {
    body(0, n, 0u);
    return;
  }
  std::vector<std::thread> pool;
  const std::uint64_t chunk = (n + threads - 1) / threads;
  for (unsigned s = 0; s < threads; ++s) {
    const std::uint64_t b = std::min(n, s * chunk), e = std::min(n, b + chunk);
    pool.emplace_back([&, b, e, s] { body(b, e, s); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

double enumerate_log_z(const PotentialFn& potential, const DiscreteSpace& space,
                       const EnumerationOptions& opts) {
  space.check_cap(opts.cap);
  const unsigned shards = std::max(1u, opts.threads);
  std::vector<LogSumExp> parts(shards);
  sharded(space.size(), shards, [&](std::uint64_t b, std::uint64_t e, unsigned s) {
    space.for_range(b, e, [&](std::span<const int> x) { parts[s].add(potential(x)); });
  });
  LogSumExp total;
  for (const auto& p : parts) total.merge(p);
  return total.value();
}

double enumerate_log_z(const EnergyModel& model, const DiscreteSpace& space,
                       const EnumerationOptions& opts) {
  return enumerate_log_z([&](std::span<const int> x) { return model.potential(x); }, space,
                         opts);
}

std::vector<double> enumerate_expectation(const EnergyModel& model, const DiscreteSpace& space,
                                          const StatisticFn& statistic, std::size_t dim,
                                          const EnumerationOptions& opts) {
  const double log_z = enumerate_log_z(model, space, opts);
  std::vector<double> mean(dim, 0.0), s(dim);
  space.for_each(
      [&](std::span<const int> x) {
        const double p = std::exp(model.potential(x) - log_z);
        std::fill(s.begin(), s.end(), 0.0);
        statistic(x, s);
        for (std::size_t i = 0; i < dim; ++i) mean[i] += p * s[i];
      },
      opts.cap);
  return mean;
}

std::vector<double> enumerate_probabilities(const PotentialFn& potential,
                                            const DiscreteSpace& space,
                                            const EnumerationOptions& opts) {
  space.check_cap(opts.cap);
  std::vector<double> u;
  u.reserve(space.size());
  space.for_each([&](std::span<const int> x) { u.push_back(potential(x)); }, opts.cap);
  const double log_z = log_sum_exp(u);
  for (double& v : u) v = std::exp(v - log_z);
  return u;
}

std::vector<double> enumerate_probabilities(const EnergyModel& model, const DiscreteSpace& space,
                                            const EnumerationOptions& opts) {
  return enumerate_probabilities([&](std::span<const int> x) { return model.potential(x); },
                                 space, opts);
}

std::vector<double> enumerate_grad_log_z(const EnergyModel& model, const DiscreteSpace& space,
                                         const EnumerationOptions& opts) {
  const double log_z = enumerate_log_z(model, space, opts);
  std::vector<double> g(model.num_params(), 0.0);
  space.for_each(
      [&](std::span<const int> x) {
        model.add_potential_grad(x, std::exp(model.potential(x) - log_z), g);
      },
      opts.cap);
  return g;
}

double tv_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ShapeMismatch("tv_distance: support mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) d += std::abs(p[i] - q[i]);
  return 0.5 * d;
}

std::vector<double> empirical_distribution(const DiscreteSpace& space,
                                           const std::vector<Config>& samples) {
  space.check_cap(kDefaultEnumerationCap);
  std::vector<double> p(space.size(), 0.0);
  if (samples.empty()) return p;
  for (const auto& x : samples) p[space.encode(x)] += 1.0;
  for (double& v : p) v /= static_cast<double>(samples.size());
  return p;
}

std::vector<double> finite_diff_grad(const std::function<double(std::span<const double>)>& f,
                                     std::span<const double> theta, double h) {
  if (!(h > 0)) throw InvalidArgument("finite_diff_grad: h must be positive");
  std::vector<double> t(theta.begin(), theta.end()), g(theta.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double orig = t[i];
    t[i] = orig + h;
    const double up = f(t);
    t[i] = orig - h;
    const double down = f(t);
    t[i] = orig;
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

std::vector<double> finite_diff_grad(EnergyModel& model, std::span<const int> x, double h) {
  const std::vector<double> saved(model.params().values().begin(), model.params().values().end());
  auto g = finite_diff_grad(
      [&](std::span<const double> theta) {
        model.params().assign(theta);
        return model.potential(x);
      },
      saved, h);
  model.params().assign(saved);
  return g;
}

double fisher_equality_check(const LatentVariableModel& model, std::span<const int> x,
                             const EnumerationOptions& opts) {
  const DiscreteSpace hs = model.latent_space(x);
  const double log_px =
      enumerate_log_z([&](std::span<const int> h) { return model.log_joint(x, h); }, hs, opts);
  if (log_px == kNegInf) throw InvalidArgument("fisher_equality_check: x has zero probability");
  std::vector<double> expected(model.num_params(), 0.0);
  hs.for_each(
      [&](std::span<const int> h) {
        const double lj = model.log_joint(x, h);
        if (lj == kNegInf) return;
        model.add_log_joint_grad(x, h, std::exp(lj - log_px), expected);
      },
      opts.cap);
  const std::vector<double> direct = model.log_marginal_grad(x);
  if (direct.size() != expected.size()) throw ShapeMismatch("fisher_equality_check: gradient size");
  double r = 0.0;
  for (std::size_t i = 0; i < direct.size(); ++i) r = std::max(r, std::abs(direct[i] - expected[i]));
  return r;
}

}  // namespace ebm
