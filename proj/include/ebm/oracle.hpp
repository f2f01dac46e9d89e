// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ebm/discrete_space.hpp"
#include "ebm/energy_model.hpp"

namespace ebm {

struct EnumerationOptions {
  std::uint64_t cap = kDefaultEnumerationCap;
  // Worker threads; each takes a contiguous index range and partial results
  // are merged in range order, so the result does not depend on scheduling.
  unsigned threads = 1;
};

using PotentialFn = std::function<double(std::span<const int>)>;
using StatisticFn = std::function<void(std::span<const int>, std::span<double>)>;

double enumerate_log_z(const PotentialFn& potential, const DiscreteSpace& space,
                       const EnumerationOptions& opts = {});
double enumerate_log_z(const EnergyModel& model, const DiscreteSpace& space,
                       const EnumerationOptions& opts = {});

// E_p[statistic(x)] where statistic writes `dim` values.
std::vector<double> enumerate_expectation(const EnergyModel& model, const DiscreteSpace& space,
                                          const StatisticFn& statistic, std::size_t dim,
                                          const EnumerationOptions& opts = {});

// Normalized probabilities in space index order.
std::vector<double> enumerate_probabilities(const PotentialFn& potential,
                                            const DiscreteSpace& space,
                                            const EnumerationOptions& opts = {});
std::vector<double> enumerate_probabilities(const EnergyModel& model, const DiscreteSpace& space,
                                            const EnumerationOptions& opts = {});

// E_p[dU/dtheta], the gradient of log Z.
std::vector<double> enumerate_grad_log_z(const EnergyModel& model, const DiscreteSpace& space,
                                         const EnumerationOptions& opts = {});

// Half the L1 distance between two probability tables.
double tv_distance(std::span<const double> p, std::span<const double> q);

// Empirical distribution of samples over the space, in index order.
std::vector<double> empirical_distribution(const DiscreteSpace& space,
                                           const std::vector<Config>& samples);

// Central differences of f around theta, one coordinate at a time.
std::vector<double> finite_diff_grad(const std::function<double(std::span<const double>)>& f,
                                     std::span<const double> theta, double h = 1e-5);

// Central differences of U_theta(x) w.r.t. theta. Parameters are restored.
std::vector<double> finite_diff_grad(EnergyModel& model, std::span<const int> x,
                                     double h = 1e-5);

// A model with a latent variable h whose values can be enumerated given x.
class LatentVariableModel {
 public:
  virtual ~LatentVariableModel() = default;
  virtual std::size_t num_params() const = 0;
  virtual DiscreteSpace latent_space(std::span<const int> x) const = 0;
  // log p(x, h) up to a theta-independent constant; -inf for impossible pairs.
  virtual double log_joint(std::span<const int> x, std::span<const int> h) const = 0;
  virtual void add_log_joint_grad(std::span<const int> x, std::span<const int> h, double scale,
                                  std::span<double> grad) const = 0;
  // d/dtheta log p(x), computed by whatever closed form the model has.
  virtual std::vector<double> log_marginal_grad(std::span<const int> x) const = 0;
};

// max |d log p(x) - E_{h|x}[d log p(x,h)]|, the posterior side by enumeration.
double fisher_equality_check(const LatentVariableModel& model, std::span<const int> x,
                             const EnumerationOptions& opts = {});

}  // namespace ebm
