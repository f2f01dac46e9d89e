// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "ebm/energy_model.hpp"
#include "ebm/oracle.hpp"
#include "ebm/samplers.hpp"

namespace ebm {

// Binary RBM with E(v,h) = -v'Wh - b'v - a'h. As an EnergyModel it is the
// visible marginal: U(v) = log sum_h exp(-E(v,h)) = b'v + sum_j softplus(a_j + W_j'v).
// Blocks: "W" (D x H, row-major by visible unit), "b" (D), "a" (H).
class Rbm : public EnergyModel {
 public:
  Rbm(int visible, int hidden);

  int visible() const { return d_; }
  int hidden() const { return h_; }
  double weight(int i, int j) const { return params_[i * h_ + j]; }
  double& weight(int i, int j) { return params_[i * h_ + j]; }
  double visible_bias(int i) const { return params_[d_ * h_ + i]; }
  double hidden_bias(int j) const { return params_[d_ * h_ + d_ + j]; }

  void randomize(Rng& rng, double scale);

  double potential(std::span<const int> v) const override;
  void add_potential_grad(std::span<const int> v, double scale, std::span<double> grad) const override;

  // -E(v, h).
  double joint_potential(std::span<const int> v, std::span<const int> h) const;
  void add_joint_grad(std::span<const int> v, std::span<const int> h, double scale,
                      std::span<double> grad) const;

  std::vector<double> hidden_probs(std::span<const int> v) const;   // p(h_j = 1 | v)
  std::vector<double> visible_probs(std::span<const int> h) const;  // p(v_i = 1 | h)

  // Sample h | v, then v | h.
  void block_gibbs(std::vector<int>& v, std::vector<int>& h, Rng& rng) const;
  std::vector<int> sample_hidden(std::span<const int> v, Rng& rng) const;
  std::vector<int> sample_visible(std::span<const int> h, Rng& rng) const;

 private:
  int d_, h_;
};

// Exact conditionals over the joint configuration [v..., h...].
class RbmJointConditionals : public FullConditionals {
 public:
  explicit RbmJointConditionals(const Rbm& rbm) : rbm_(rbm) {}
  std::size_t num_sites() const override { return std::size_t(rbm_.visible() + rbm_.hidden()); }
  const std::vector<int>& site_values(std::size_t) const override { return values_; }
  void conditional_log_weights(std::span<const int> x, std::size_t site,
                               std::span<double> out) const override;

 private:
  const Rbm& rbm_;
  std::vector<int> values_ = {0, 1};
};

// A copy of an RBM whose configurations are the joint [v..., h...], for
// enumeration over D + H bits. Parameter layout is the RBM's.
class RbmJoint : public Rbm {
 public:
  explicit RbmJoint(const Rbm& rbm) : Rbm(rbm) {}
  double potential(std::span<const int> x) const override;
  void add_potential_grad(std::span<const int> x, double scale, std::span<double> grad) const override;
};

// Hidden units as the latent variable of p(v, h).
class RbmLatent : public LatentVariableModel {
 public:
  explicit RbmLatent(const Rbm& rbm) : rbm_(rbm) {}
  std::size_t num_params() const override { return rbm_.num_params(); }
  DiscreteSpace latent_space(std::span<const int>) const override {
    return DiscreteSpace::binary(rbm_.hidden());
  }
  double log_joint(std::span<const int> v, std::span<const int> h) const override {
    return rbm_.joint_potential(v, h);
  }
  void add_log_joint_grad(std::span<const int> v, std::span<const int> h, double scale,
                          std::span<double> grad) const override {
    rbm_.add_joint_grad(v, h, scale, grad);
  }
  std::vector<double> log_marginal_grad(std::span<const int> v) const override;

 private:
  const Rbm& rbm_;
};

// Average log p(v) over the dataset; p~(v) by enumerating h, Z over v-space.
double rbm_loglik_exact(const Rbm& rbm, const std::vector<Config>& data,
                        const EnumerationOptions& opts = {});
double rbm_log_z_exact(const Rbm& rbm, const EnumerationOptions& opts = {});

}  // namespace ebm
