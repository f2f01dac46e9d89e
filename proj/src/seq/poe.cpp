// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ebm/seq/poe.hpp"

#include <algorithm>

#include "ebm/error.hpp"

namespace ebm {

double poe_energy(const std::vector<Expert>& experts, std::span<const int> x) {
  if (experts.empty()) throw InvalidArgument("poe_energy: no experts");
  double e = 0;
  for (const auto& ex : experts) e += ex.weight * ex.energy(x);
  return e;
}

Expert fluency_expert(const NgramAlm& alm, double weight) {
  return {"fluency", weight, [&alm](std::span<const int> x) { return -alm.log_prob_fixed_length(x); }};
}

Expert keyword_expert(int keyword, double penalty, double weight) {
  return {"keyword", weight, [keyword, penalty](std::span<const int> x) {
            return std::find(x.begin(), x.end(), keyword) == x.end() ? penalty : 0.0;
          }};
}

Expert hamming_expert(Config source, double weight) {
  return {"hamming", weight, [source = std::move(source)](std::span<const int> x) {
            if (x.size() != source.size()) throw InvalidArgument("hamming expert: length mismatch");
            double d = 0;
            for (std::size_t i = 0; i < x.size(); ++i) d += x[i] != source[i];
            return d;
          }};
}

PoeTarget::PoeTarget(std::vector<Expert> experts) : experts_(std::move(experts)) {
  if (experts_.empty()) throw InvalidArgument("PoeTarget: no experts");
}

}  // namespace ebm
