// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ebm {

struct ParamBlock {
  std::string name;
  std::size_t offset = 0;
  std::size_t size = 0;
  double step_multiplier = 1.0;
};

// Flat parameter storage split into named, contiguous blocks. Blocks keep
// insertion order, so the flat layout is stable across runs.
class ParamVector {
 public:
  // Appends a block and returns its offset in the flat vector.
  std::size_t add_block(std::string name, std::size_t size, double init = 0.0,
                        double step_multiplier = 1.0);

  bool has_block(std::string_view name) const;
  const ParamBlock& info(std::string_view name) const;
  std::span<double> block(std::string_view name);
  std::span<const double> block(std::string_view name) const;
  const std::vector<ParamBlock>& blocks() const { return blocks_; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  // Per-coordinate step multipliers expanded from the block settings.
  std::vector<double> step_multipliers() const;

  // Replaces all values; sizes must match.
  void assign(std::span<const double> v);

  bool operator==(const ParamVector& other) const;

 private:
  std::vector<ParamBlock> blocks_;
  std::vector<double> values_;
};

}  // namespace ebm
