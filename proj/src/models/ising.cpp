// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ebm/models/ising.hpp"

#include <cmath>
#include <ostream>

#include "ebm/error.hpp"
#include "ebm/numeric.hpp"

namespace ebm {

IsingModel::IsingModel(int side, double coupling, double field, double beta)
    : side_(side), beta_(beta) {
  if (side < 1) throw InvalidArgument("Ising side must be >= 1");
  params_.add_block("coupling", 1, coupling);
  params_.add_block("field", 1, field);
}

namespace {
// (sum over bonds x_i x_j, sum_i x_i)
std::pair<double, double> ising_stats(std::span<const int> x, int side) {
  double bonds = 0, total = 0;
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c) {
      const int s = x[r * side + c];
      total += s;
      if (c + 1 < side) bonds += s * x[r * side + c + 1];
      if (r + 1 < side) bonds += s * x[(r + 1) * side + c];
    }
  return {bonds, total};
}
}  // namespace

double IsingModel::potential(std::span<const int> x) const {
  if (x.size() != std::size_t(num_spins())) throw ShapeMismatch("Ising: wrong number of spins");
  const auto [bonds, total] = ising_stats(x, side_);
  return beta_ * (coupling() * bonds + field() * total);
}

void IsingModel::add_potential_grad(std::span<const int> x, double scale,
                                    std::span<double> grad) const {
  const auto [bonds, total] = ising_stats(x, side_);
  grad[0] += scale * beta_ * bonds;
  grad[1] += scale * beta_ * total;
}

int IsingModel::neighbor_sum(std::span<const int> x, std::size_t site) const {
  const int r = int(site) / side_, c = int(site) % side_;
  int s = 0;
  if (r > 0) s += x[site - side_];
  if (r + 1 < side_) s += x[site + side_];
  if (c > 0) s += x[site - 1];
  if (c + 1 < side_) s += x[site + 1];
  return s;
}

void IsingModel::conditional_log_weights(std::span<const int> x, std::size_t site,
                                         std::span<double> out) const {
  const double h = beta_ * (coupling() * neighbor_sum(x, site) + field());
  out[0] = -h;
  out[1] = h;
}

double ising_gibbs_conditional(const IsingModel& model, std::size_t site, std::span<const int> x) {
  if (site >= std::size_t(model.num_spins())) throw InvalidArgument("site outside lattice");
  return sigmoid(2.0 * model.beta() * (model.coupling() * model.neighbor_sum(x, site) + model.field()));
}

double magnetization(std::span<const int> spins) {
  double s = 0;
  for (int v : spins) s += v;
  return spins.empty() ? 0.0 : s / double(spins.size());
}

IsingRun ising_sample_grid(const IsingModel& model, std::uint64_t sweeps, std::uint64_t seed,
                           std::uint64_t snapshot_every, double burn_in_fraction) {
  DiscreteChain chain{Config(model.num_spins()), 0, Rng(seed, 0), {}};
  for (auto& s : chain.x) s = chain.rng.bernoulli(0.5) ? 1 : -1;
  IsingRun run;
  const auto burn = std::uint64_t(burn_in_fraction * double(sweeps));
  double acc = 0;
  for (std::uint64_t t = 1; t <= sweeps; ++t) {
    // Same conditional as gibbs_sweep, inlined for the large lattices.
    for (std::size_t site = 0; site < chain.x.size(); ++site)
      chain.x[site] = chain.rng.uniform() < ising_gibbs_conditional(model, site, chain.x) ? 1 : -1;
    const double m = std::abs(magnetization(chain.x));
    run.abs_magnetization.push_back(m);
    if (t > burn) acc += m;
    if (snapshot_every && t % snapshot_every == 0) run.snapshots.push_back(chain.x);
  }
  if (!snapshot_every) run.snapshots.push_back(chain.x);
  run.mean_abs_magnetization = sweeps > burn ? acc / double(sweeps - burn) : 0.0;
  return run;
}

void write_spin_pgm(std::ostream& out, std::span<const int> spins, int side, int scale,
                    const std::string& comment) {
  if (spins.size() != std::size_t(side * side)) throw ShapeMismatch("write_spin_pgm: size");
  out << "P2\n";
  if (!comment.empty()) out << "# " << comment << '\n';
  out << side * scale << ' ' << side * scale << "\n255\n";
  for (int r = 0; r < side * scale; ++r) {
    for (int c = 0; c < side * scale; ++c)
      out << (c ? " " : "") << (spins[(r / scale) * side + c / scale] > 0 ? 255 : 0);
    out << '\n';
  }
}

}  // namespace ebm
