// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ebm/models/rbm.hpp"

#include <cmath>

#include "ebm/error.hpp"
#include "ebm/numeric.hpp"

namespace ebm {

Rbm::Rbm(int visible, int hidden) : d_(visible), h_(hidden) {
  if (visible < 1 || hidden < 1) throw InvalidArgument("RBM needs at least one unit per layer");
  params_.add_block("W", std::size_t(d_) * h_);
  params_.add_block("b", d_);
  params_.add_block("a", h_);
}

void Rbm::randomize(Rng& rng, double scale) {
  for (auto& v : params_.values()) v = rng.uniform(-scale, scale);
}

double Rbm::potential(std::span<const int> v) const {
  if (v.size() != std::size_t(d_)) throw ShapeMismatch("RBM: visible size");
  double u = 0;
  for (int i = 0; i < d_; ++i) u += visible_bias(i) * v[i];
  for (int j = 0; j < h_; ++j) {
    double s = hidden_bias(j);
    for (int i = 0; i < d_; ++i) s += weight(i, j) * v[i];
    u += softplus(s);
  }
  return u;
}

void Rbm::add_potential_grad(std::span<const int> v, double scale, std::span<double> grad) const {
  const auto ph = hidden_probs(v);
  for (int i = 0; i < d_; ++i) {
    grad[d_ * h_ + i] += scale * v[i];
    if (!v[i]) continue;
    for (int j = 0; j < h_; ++j) grad[i * h_ + j] += scale * ph[j];
  }
  for (int j = 0; j < h_; ++j) grad[d_ * h_ + d_ + j] += scale * ph[j];
}

double Rbm::joint_potential(std::span<const int> v, std::span<const int> h) const {
  double u = 0;
  for (int i = 0; i < d_; ++i) {
    u += visible_bias(i) * v[i];
    if (!v[i]) continue;
    for (int j = 0; j < h_; ++j) u += weight(i, j) * h[j];
  }
  for (int j = 0; j < h_; ++j) u += hidden_bias(j) * h[j];
  return u;
}

void Rbm::add_joint_grad(std::span<const int> v, std::span<const int> h, double scale,
                         std::span<double> grad) const {
  for (int i = 0; i < d_; ++i) {
    grad[d_ * h_ + i] += scale * v[i];
    for (int j = 0; j < h_; ++j) grad[i * h_ + j] += scale * v[i] * h[j];
  }
  for (int j = 0; j < h_; ++j) grad[d_ * h_ + d_ + j] += scale * h[j];
}

std::vector<double> Rbm::hidden_probs(std::span<const int> v) const {
  std::vector<double> p(h_);
  for (int j = 0; j < h_; ++j) {
    double s = hidden_bias(j);
    for (int i = 0; i < d_; ++i) s += weight(i, j) * v[i];
    p[j] = sigmoid(s);
  }
  return p;
}

std::vector<double> Rbm::visible_probs(std::span<const int> h) const {
  std::vector<double> p(d_);
  for (int i = 0; i < d_; ++i) {
    double s = visible_bias(i);
    for (int j = 0; j < h_; ++j) s += weight(i, j) * h[j];
    p[i] = sigmoid(s);
  }
  return p;
}

std::vector<int> Rbm::sample_hidden(std::span<const int> v, Rng& rng) const {
  auto p = hidden_probs(v);
  std::vector<int> h(h_);
  for (int j = 0; j < h_; ++j) h[j] = rng.uniform() < p[j];
  return h;
}

std::vector<int> Rbm::sample_visible(std::span<const int> h, Rng& rng) const {
  auto p = visible_probs(h);
  std::vector<int> v(d_);
  for (int i = 0; i < d_; ++i) v[i] = rng.uniform() < p[i];
  return v;
}

void Rbm::block_gibbs(std::vector<int>& v, std::vector<int>& h, Rng& rng) const {
  h = sample_hidden(v, rng);
  v = sample_visible(h, rng);
}

void RbmJointConditionals::conditional_log_weights(std::span<const int> x, std::size_t site,
                                                   std::span<double> out) const {
  const int d = rbm_.visible(), hn = rbm_.hidden();
  double s;
  if (int(site) < d) {
    s = rbm_.visible_bias(int(site));
    for (int j = 0; j < hn; ++j) s += rbm_.weight(int(site), j) * x[d + j];
  } else {
    const int j = int(site) - d;
    s = rbm_.hidden_bias(j);
    for (int i = 0; i < d; ++i) s += rbm_.weight(i, j) * x[i];
  }
  out[0] = 0.0;
  out[1] = s;
}

double RbmJoint::potential(std::span<const int> x) const {
  if (x.size() != std::size_t(visible() + hidden())) throw ShapeMismatch("RbmJoint: size");
  return joint_potential(x.first(visible()), x.subspan(visible()));
}

void RbmJoint::add_potential_grad(std::span<const int> x, double scale, std::span<double> grad) const {
  add_joint_grad(x.first(visible()), x.subspan(visible()), scale, grad);
}

std::vector<double> RbmLatent::log_marginal_grad(std::span<const int> v) const {
  std::vector<double> g(rbm_.num_params(), 0.0);
  rbm_.add_potential_grad(v, 1.0, g);
  return g;
}

double rbm_log_z_exact(const Rbm& rbm, const EnumerationOptions& opts) {
  const auto hs = DiscreteSpace::binary(rbm.hidden());
  const auto vs = DiscreteSpace::binary(rbm.visible());
  const std::uint64_t joint = vs.size() * hs.size();
  if (joint > opts.cap) throw EnumerationRefused(joint, opts.cap);
  EnumerationOptions inner = opts;
  inner.threads = 1;
  return enumerate_log_z(
      [&](std::span<const int> v) {
        return enumerate_log_z([&](std::span<const int> h) { return rbm.joint_potential(v, h); }, hs,
                               inner);
      },
      vs, opts);
}

double rbm_loglik_exact(const Rbm& rbm, const std::vector<Config>& data,
                        const EnumerationOptions& opts) {
  if (data.empty()) throw InvalidArgument("rbm_loglik_exact: empty dataset");
  const double log_z = rbm_log_z_exact(rbm, opts);
  const auto hs = DiscreteSpace::binary(rbm.hidden());
  double total = 0;
  for (const auto& v : data)
    total += enumerate_log_z([&](std::span<const int> h) { return rbm.joint_potential(v, h); }, hs,
                             opts) -
             log_z;
  return total / double(data.size());
}

}  // namespace ebm
