// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ebm/models/calibration.hpp"

#include <algorithm>
#include <cmath>

#include "ebm/error.hpp"

namespace ebm {

CalibrationBins calibration_bins(const std::vector<CalibrationPoint>& points, int num_classes,
                                 int num_bins) {
  if (points.empty()) throw InvalidArgument("calibration: empty prediction set");
  if (num_classes < 1 || num_bins < 1) throw InvalidArgument("calibration: bad class/bin count");
  CalibrationBins cb;
  cb.num_bins = num_bins;
  cb.num_classes = num_classes;
  cb.bins.assign(num_classes, std::vector<CalibrationBin>(num_bins));
  cb.class_counts.assign(num_classes, 0);
  for (const auto& p : points) {
    if (p.cls < 0 || p.cls >= num_classes) throw InvalidArgument("calibration: class out of range");
    if (!(p.confidence >= 0.0 && p.confidence <= 1.0))
      throw InvalidArgument("calibration: confidence outside [0, 1]");
    const int b = std::min(num_bins - 1, int(std::floor(p.confidence * num_bins)));
    auto& bin = cb.bins[p.cls][b];
    ++bin.count;
    bin.accuracy += p.correct ? 1.0 : 0.0;
    bin.mean_confidence += p.confidence;
    ++cb.class_counts[p.cls];
  }
  for (auto& row : cb.bins)
    for (auto& bin : row)
      if (bin.count) {
        bin.accuracy /= double(bin.count);
        bin.mean_confidence /= double(bin.count);
      }
  return cb;
}

double ece(const std::vector<CalibrationPoint>& points, int num_classes, int num_bins) {
  const auto cb = calibration_bins(points, num_classes, num_bins);
  double total = 0;
  for (int y = 0; y < num_classes; ++y) {
    const double n = double(cb.class_counts[y]);
    if (n == 0) continue;
    for (const auto& bin : cb.bins[y])
      total += double(bin.count) / n * std::abs(bin.accuracy - bin.mean_confidence);
  }
  return total / num_classes;
}

std::vector<CalibrationPoint> calibration_points(const std::vector<std::vector<double>>& probs,
                                                 const std::vector<int>& labels) {
  if (probs.size() != labels.size()) throw ShapeMismatch("calibration_points: one label per row");
  std::vector<CalibrationPoint> pts;
  for (std::size_t i = 0; i < probs.size(); ++i)
    for (std::size_t k = 0; k < probs[i].size(); ++k)
      pts.push_back({int(k), probs[i][k], labels[i] == int(k)});
  return pts;
}

}  // namespace ebm
