// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

namespace ebm {

// One (class, confidence, correct) prediction. Each example contributes one
// point per class.
struct CalibrationPoint {
  int cls = 0;
  double confidence = 0.0;
  bool correct = false;
};

struct CalibrationBin {
  std::size_t count = 0;
  double accuracy = 0.0;
  double mean_confidence = 0.0;
};

// B equal-width bins on [0, 1]; bin b covers [b/B, (b+1)/B) and the last bin
// includes 1.
struct CalibrationBins {
  int num_bins = 20;
  int num_classes = 1;
  std::vector<std::vector<CalibrationBin>> bins;  // [class][bin]
  std::vector<std::size_t> class_counts;
};

CalibrationBins calibration_bins(const std::vector<CalibrationPoint>& points, int num_classes,
                                 int num_bins = 20);

// (1/|Y|) sum_y sum_b (|B_yb| / n) |acc(B_yb) - conf(B_yb)|.
double ece(const std::vector<CalibrationPoint>& points, int num_classes, int num_bins = 20);

// Points from per-example class probabilities and true labels.
std::vector<CalibrationPoint> calibration_points(const std::vector<std::vector<double>>& probs,
                                                 const std::vector<int>& labels);

}  // namespace ebm
