// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ebm/models/jem.hpp"

#include <algorithm>
#include <cmath>

#include "ebm/error.hpp"
#include "ebm/numeric.hpp"
#include "ebm/optim.hpp"

namespace ebm {

std::size_t feature_map_size(FeatureMap map, std::size_t dim) {
  return map == FeatureMap::kIdentity ? dim : dim + dim * (dim + 1) / 2;
}

std::vector<double> apply_feature_map(FeatureMap map, std::span<const double> x) {
  std::vector<double> f(x.begin(), x.end());
  if (map == FeatureMap::kQuadratic)
    for (std::size_t i = 0; i < x.size(); ++i)
      for (std::size_t j = i; j < x.size(); ++j) f.push_back(x[i] * x[j]);
  return f;
}

std::vector<double> feature_map_backward(FeatureMap map, std::span<const double> x,
                                         std::span<const double> feature_grad) {
  std::vector<double> g(feature_grad.begin(), feature_grad.begin() + x.size());
  if (map == FeatureMap::kQuadratic) {
    std::size_t k = x.size();
    for (std::size_t i = 0; i < x.size(); ++i)
      for (std::size_t j = i; j < x.size(); ++j, ++k) {
        g[i] += feature_grad[k] * x[j];
        g[j] += feature_grad[k] * x[i];
      }
  }
  return g;
}

JemModel::JemModel(std::size_t input_dim, std::size_t num_classes, FeatureMap map,
                   std::vector<std::size_t> hidden)
    : input_dim_(input_dim), k_(num_classes), map_(map) {
  if (num_classes < 1) throw InvalidArgument("JEM needs at least one class");
  std::vector<std::size_t> sizes = {feature_map_size(map, input_dim)};
  std::vector<Activation> acts;
  for (auto h : hidden) {
    sizes.push_back(h);
    acts.push_back(Activation::kTanh);
  }
  sizes.push_back(num_classes);
  acts.push_back(Activation::kIdentity);
  net_ = DenseNet(sizes, acts);
  net_.add_blocks(params_, "classifier");
}

void JemModel::init(Rng& rng, double scale) { net_.init(params_.values(), rng, scale); }

std::vector<double> JemModel::logits(std::span<const double> x) const {
  if (x.size() != input_dim_) throw ShapeMismatch("JEM: input size");
  return net_.output(params_.values(), apply_feature_map(map_, x));
}

double JemModel::joint_potential(std::span<const double> x, int y) const { return logits(x).at(y); }

std::vector<double> JemModel::class_probs(std::span<const double> x) const { return softmax(logits(x)); }

int JemModel::predict(std::span<const double> x) const {
  const auto l = logits(x);
  return int(std::max_element(l.begin(), l.end()) - l.begin());
}

double JemModel::potential(std::span<const double> x) const { return log_sum_exp(logits(x)); }

double JemModel::log_conditional(std::span<const double> x, int y) const {
  const auto l = logits(x);
  return l.at(y) - log_sum_exp(l);
}

void JemModel::grad_x(std::span<const double> x, std::span<double> out) const {
  const auto f = apply_feature_map(map_, x);
  const auto acts = net_.forward(params_.values(), f);
  std::vector<double> scratch(net_.num_params(), 0.0);
  const auto gf = net_.backward(params_.values(), acts, softmax(acts.output()), scratch);
  const auto gx = feature_map_backward(map_, x, gf);
  std::copy(gx.begin(), gx.end(), out.begin());
}

void JemModel::add_potential_grad(std::span<const double> x, double scale,
                                  std::span<double> grad) const {
  const auto acts = net_.forward(params_.values(), apply_feature_map(map_, x));
  net_.backward(params_.values(), acts, softmax(acts.output()), grad, scale);
}

void JemModel::add_log_conditional_grad(std::span<const double> x, int y, double scale,
                                        std::span<double> grad) const {
  const auto acts = net_.forward(params_.values(), apply_feature_map(map_, x));
  auto g = softmax(acts.output());
  for (auto& v : g) v = -v;
  g.at(y) += 1.0;
  net_.backward(params_.values(), acts, g, grad, scale);
}

std::vector<std::vector<double>> Grid2D::points() const {
  std::vector<std::vector<double>> p;
  p.reserve(std::size_t(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      p.push_back({lo[0] + (i + 0.5) * (hi[0] - lo[0]) / n, lo[1] + (j + 0.5) * (hi[1] - lo[1]) / n});
  return p;
}

double Grid2D::cell_area() const { return (hi[0] - lo[0]) * (hi[1] - lo[1]) / (double(n) * n); }

ObjectiveValue jem_ssl_objective(const JemModel& jem, const std::vector<LabeledPoint>& labeled,
                                 const std::vector<std::vector<double>>& unlabeled,
                                 double alpha_d, const Grid2D& grid, bool generative) {
  if (alpha_d < 0) throw InvalidArgument("alpha_d must be non-negative");
  if (labeled.empty() && alpha_d > 0) throw InvalidArgument("alpha_d > 0 needs labeled data");
  ObjectiveValue out;
  out.gradient.assign(jem.params().size(), 0.0);
  if (generative) {
    const std::size_t n = labeled.size() + unlabeled.size();
    if (n == 0) throw InvalidArgument("jem_ssl_objective: no data");
    const double w = 1.0 / double(n);
    for (const auto& p : labeled) {
      out.value -= w * jem.potential(p.x);
      jem.add_potential_grad(p.x, -w, out.gradient);
    }
    for (const auto& x : unlabeled) {
      out.value -= w * jem.potential(x);
      jem.add_potential_grad(x, -w, out.gradient);
    }
    const auto pts = grid.points();
    std::vector<double> u(pts.size());
    for (std::size_t g = 0; g < pts.size(); ++g) u[g] = jem.potential(pts[g]);
    const double log_z = log_sum_exp(u);
    out.value += log_z + std::log(grid.cell_area());
    for (std::size_t g = 0; g < pts.size(); ++g)
      jem.add_potential_grad(pts[g], std::exp(u[g] - log_z), out.gradient);
  }
  for (const auto& p : labeled) {
    out.value -= alpha_d * jem.log_conditional(p.x, p.y);
    jem.add_log_conditional_grad(p.x, p.y, -alpha_d, out.gradient);
  }
  return out;
}

namespace {

LabeledPoint draw_blob_point(const JemBlobsConfig& cfg, Rng& rng) {
  LabeledPoint p;
  p.y = rng.bernoulli(0.5) ? 1 : 0;
  p.x = {(p.y ? cfg.separation : -cfg.separation) + cfg.sigma_x * rng.normal(),
         cfg.sigma_y * rng.normal()};
  return p;
}

double accuracy(const JemModel& jem, const std::vector<LabeledPoint>& pts) {
  std::size_t ok = 0;
  for (const auto& p : pts) ok += jem.predict(p.x) == p.y;
  return double(ok) / double(pts.size());
}

}  // namespace

JemBlobsResult jem_blobs_experiment(const JemBlobsConfig& cfg, std::uint64_t seed) {
  Rng rng(seed, 0);
  std::vector<LabeledPoint> labeled;
  for (int y = 0; y < 2; ++y)
    while (int(std::count_if(labeled.begin(), labeled.end(),
                             [y](const LabeledPoint& p) { return p.y == y; })) < cfg.labels_per_class) {
      auto p = draw_blob_point(cfg, rng);
      if (p.y == y) labeled.push_back(p);
    }
  std::vector<std::vector<double>> unlabeled;
  for (int i = 0; i < cfg.unlabeled; ++i) unlabeled.push_back(draw_blob_point(cfg, rng).x);
  std::vector<LabeledPoint> test;
  for (int i = 0; i < cfg.test; ++i) test.push_back(draw_blob_point(cfg, rng));

  auto train = [&](bool generative) {
    JemModel jem(2, 2, FeatureMap::kQuadratic);
    Rng init = rng.split(1);
    jem.init(init, 0.01);
    Adam opt(cfg.lr);
    for (int it = 0; it < cfg.iterations; ++it) {
      const auto obj = jem_ssl_objective(jem, labeled, unlabeled, cfg.alpha_d, cfg.grid, generative);
      opt.descend(jem.params().values(), obj.gradient);
    }
    return accuracy(jem, test);
  };
  JemBlobsResult r;
  r.ssl_accuracy = train(true);
  r.supervised_accuracy = train(false);
  return r;
}

}  // namespace ebm
