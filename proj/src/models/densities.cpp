// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ebm/models/densities.hpp"

#include <cmath>

#include "ebm/error.hpp"
#include "ebm/numeric.hpp"

namespace ebm {

GaussianMixture2D::GaussianMixture2D(std::vector<double> weights, std::vector<Gaussian2D> components) {
  if (weights.size() != components.size() || weights.empty())
    throw ShapeMismatch("GaussianMixture2D: one weight per component");
  double total = 0;
  for (double w : weights) total += w;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const auto& c = components[k];
    const double det = c.cov[0][0] * c.cov[1][1] - c.cov[0][1] * c.cov[1][0];
    if (!(det > 0) || !(c.cov[0][0] > 0)) throw InvalidArgument("covariance not positive definite");
    Prepared p;
    p.mean[0] = c.mean[0];
    p.mean[1] = c.mean[1];
    p.prec[0][0] = c.cov[1][1] / det;
    p.prec[1][1] = c.cov[0][0] / det;
    p.prec[0][1] = p.prec[1][0] = -c.cov[0][1] / det;
    p.log_norm = -std::log(2 * M_PI) - 0.5 * std::log(det);
    p.chol[0][0] = std::sqrt(c.cov[0][0]);
    p.chol[0][1] = 0;
    p.chol[1][0] = c.cov[1][0] / p.chol[0][0];
    p.chol[1][1] = std::sqrt(c.cov[1][1] - p.chol[1][0] * p.chol[1][0]);
    comps_.push_back(p);
    log_w_.push_back(std::log(weights[k] / total));
  }
}

namespace {
double quad(const double prec[2][2], double d0, double d1) {
  return prec[0][0] * d0 * d0 + 2 * prec[0][1] * d0 * d1 + prec[1][1] * d1 * d1;
}
}  // namespace

std::vector<double> GaussianMixture2D::component_posterior(std::span<const double> x) const {
  std::vector<double> l(comps_.size());
  for (std::size_t k = 0; k < comps_.size(); ++k) {
    const auto& c = comps_[k];
    l[k] = log_w_[k] + c.log_norm - 0.5 * quad(c.prec, x[0] - c.mean[0], x[1] - c.mean[1]);
  }
  return softmax(l);
}

double GaussianMixture2D::potential(std::span<const double> x) const {
  LogSumExp acc;
  for (std::size_t k = 0; k < comps_.size(); ++k) {
    const auto& c = comps_[k];
    acc.add(log_w_[k] + c.log_norm - 0.5 * quad(c.prec, x[0] - c.mean[0], x[1] - c.mean[1]));
  }
  return acc.value();
}

void GaussianMixture2D::grad_x(std::span<const double> x, std::span<double> out) const {
  const auto r = component_posterior(x);
  out[0] = out[1] = 0;
  for (std::size_t k = 0; k < comps_.size(); ++k) {
    const auto& c = comps_[k];
    const double d0 = x[0] - c.mean[0], d1 = x[1] - c.mean[1];
    out[0] -= r[k] * (c.prec[0][0] * d0 + c.prec[0][1] * d1);
    out[1] -= r[k] * (c.prec[1][0] * d0 + c.prec[1][1] * d1);
  }
}

std::vector<double> GaussianMixture2D::sample(Rng& rng) const {
  std::vector<double> w(log_w_.size());
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = std::exp(log_w_[k]);
  const auto& c = comps_[rng.categorical(w)];
  const double z0 = rng.normal(), z1 = rng.normal();
  return {c.mean[0] + c.chol[0][0] * z0, c.mean[1] + c.chol[1][0] * z0 + c.chol[1][1] * z1};
}

QuadraticEnergy::QuadraticEnergy(std::size_t dim) : d_(dim) {
  params_.add_block("linear", dim);
  params_.add_block("quadratic", dim * (dim + 1) / 2);
}

std::size_t QuadraticEnergy::tri(std::size_t i, std::size_t j) const {
  if (i > j) std::swap(i, j);
  return d_ + i * d_ - i * (i - 1) / 2 + (j - i);
}

double QuadraticEnergy::a(std::size_t i, std::size_t j) const { return params_[tri(i, j)]; }

double QuadraticEnergy::potential(std::span<const double> x) const {
  double u = 0;
  for (std::size_t i = 0; i < d_; ++i) {
    u += params_[i] * x[i] + 0.5 * a(i, i) * x[i] * x[i];
    for (std::size_t j = i + 1; j < d_; ++j) u += a(i, j) * x[i] * x[j];
  }
  return u;
}

void QuadraticEnergy::grad_x(std::span<const double> x, std::span<double> out) const {
  for (std::size_t i = 0; i < d_; ++i) {
    out[i] = params_[i];
    for (std::size_t j = 0; j < d_; ++j) out[i] += a(i, j) * x[j];
  }
}

void QuadraticEnergy::add_potential_grad(std::span<const double> x, double scale,
                                         std::span<double> grad) const {
  for (std::size_t i = 0; i < d_; ++i) {
    grad[i] += scale * x[i];
    grad[tri(i, i)] += scale * 0.5 * x[i] * x[i];
    for (std::size_t j = i + 1; j < d_; ++j) grad[tri(i, j)] += scale * x[i] * x[j];
  }
}

namespace {
// Gauss-Jordan inverse; the matrices here are tiny and well conditioned.
std::vector<std::vector<double>> invert(std::vector<std::vector<double>> m) {
  const std::size_t n = m.size();
  std::vector<std::vector<double>> inv(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
    if (m[piv][c] == 0.0) throw NumericalError("singular matrix");
    std::swap(m[c], m[piv]);
    std::swap(inv[c], inv[piv]);
    const double p = m[c][c];
    for (std::size_t k = 0; k < n; ++k) {
      m[c][k] /= p;
      inv[c][k] /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = m[r][c];
      for (std::size_t k = 0; k < n; ++k) {
        m[r][k] -= f * m[c][k];
        inv[r][k] -= f * inv[c][k];
      }
    }
  }
  return inv;
}
}  // namespace

void QuadraticEnergy::set_gaussian(std::span<const double> mean,
                                   const std::vector<std::vector<double>>& cov) {
  const auto prec = invert(cov);
  for (std::size_t i = 0; i < d_; ++i) {
    params_[i] = 0;
    for (std::size_t j = 0; j < d_; ++j) params_[i] += prec[i][j] * mean[j];
    for (std::size_t j = i; j < d_; ++j) params_[tri(i, j)] = -prec[i][j];
  }
}

std::vector<std::vector<double>> QuadraticEnergy::covariance() const {
  std::vector<std::vector<double>> neg_a(d_, std::vector<double>(d_));
  for (std::size_t i = 0; i < d_; ++i)
    for (std::size_t j = 0; j < d_; ++j) neg_a[i][j] = -a(i, j);
  return invert(neg_a);
}

std::vector<double> QuadraticEnergy::mean() const {
  const auto c = covariance();
  std::vector<double> m(d_, 0.0);
  for (std::size_t i = 0; i < d_; ++i)
    for (std::size_t j = 0; j < d_; ++j) m[i] += c[i][j] * params_[j];
  return m;
}

}  // namespace ebm
