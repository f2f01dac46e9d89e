// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "ebm/energy_model.hpp"
#include "ebm/tiny_net.hpp"

namespace ebm {

// Fixed input expansion applied before the classifier net.
enum class FeatureMap {
  kIdentity,   // x
  kQuadratic,  // (x, x_i * x_j for i <= j)
};

std::size_t feature_map_size(FeatureMap map, std::size_t dim);
std::vector<double> apply_feature_map(FeatureMap map, std::span<const double> x);
// Chain rule through the map: d/dx given d/dfeatures.
std::vector<double> feature_map_backward(FeatureMap map, std::span<const double> x,
                                         std::span<const double> feature_grad);

// Classifier-as-EBM: U(x, y) = logit_y(x), U(x) = logsumexp_y logit_y(x).
// As a ContinuousEnergyModel it is the marginal over x.
class JemModel : public ContinuousEnergyModel {
 public:
  JemModel(std::size_t input_dim, std::size_t num_classes, FeatureMap map,
           std::vector<std::size_t> hidden = {});

  std::size_t dim() const override { return input_dim_; }
  std::size_t num_classes() const { return k_; }
  const DenseNet& net() const { return net_; }
  void init(Rng& rng, double scale = 0.1);

  std::vector<double> logits(std::span<const double> x) const;
  double joint_potential(std::span<const double> x, int y) const;
  std::vector<double> class_probs(std::span<const double> x) const;
  int predict(std::span<const double> x) const;

  double potential(std::span<const double> x) const override;
  void grad_x(std::span<const double> x, std::span<double> out) const override;
  void add_potential_grad(std::span<const double> x, double scale,
                          std::span<double> grad) const override;
  // grad += scale * d log p(y|x) / dtheta.
  void add_log_conditional_grad(std::span<const double> x, int y, double scale,
                                std::span<double> grad) const;
  double log_conditional(std::span<const double> x, int y) const;

 private:
  std::size_t input_dim_, k_;
  FeatureMap map_;
  DenseNet net_;
};

struct LabeledPoint {
  std::vector<double> x;
  int y = 0;
};

// Regular grid over a 2-D box used to enumerate the negative phase.
struct Grid2D {
  double lo[2] = {-1, -1};
  double hi[2] = {1, 1};
  int n = 50;  // points per axis (cell centers)
  std::vector<std::vector<double>> points() const;
  double cell_area() const;
};

// Minimization form of the hybrid objective:
//   -mean_{x in data} log p(x) - alpha_d * sum_{labeled} log p(y|x),
// with log Z taken over the grid. The data set is labeled x's plus unlabeled.
// Pass generative = false for the purely discriminative baseline.
ObjectiveValue jem_ssl_objective(const JemModel& jem, const std::vector<LabeledPoint>& labeled,
                                 const std::vector<std::vector<double>>& unlabeled,
                                 double alpha_d, const Grid2D& grid, bool generative = true);

// Two elongated Gaussian blobs; a few labels, many unlabeled points.
struct JemBlobsConfig {
  int labels_per_class = 2;
  int unlabeled = 500;
  int test = 2000;
  double separation = 1.2;  // class means at (-s, 0) and (s, 0)
  double sigma_x = 0.45;
  double sigma_y = 1.6;
  double alpha_d = 1.0;
  int iterations = 300;
  double lr = 0.05;
  Grid2D grid{{-6, -6}, {6, 6}, 32};
};

struct JemBlobsResult {
  double ssl_accuracy = 0.0;
  double supervised_accuracy = 0.0;
};

// Trains the same quadratic-feature JEM twice (generative + discriminative, then
// discriminative only) from one seed and reports held-out accuracy.
JemBlobsResult jem_blobs_experiment(const JemBlobsConfig& cfg, std::uint64_t seed);

}  // namespace ebm
