// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ebm/param_vector.hpp"

#include <algorithm>

#include "ebm/error.hpp"

namespace ebm {

std::size_t ParamVector::add_block(std::string name, std::size_t size, double init,
                                   double step_multiplier) {
  if (has_block(name)) throw InvalidArgument("duplicate parameter block: " + name);
  const std::size_t offset = values_.size();
  blocks_.push_back({std::move(name), offset, size, step_multiplier});
  values_.resize(offset + size, init);
  return offset;
}

bool ParamVector::has_block(std::string_view name) const {
  return std::any_of(blocks_.begin(), blocks_.end(), [&](const ParamBlock& b) { return b.name == name; });
}

const ParamBlock& ParamVector::info(std::string_view name) const {
  for (const auto& b : blocks_)
    if (b.name == name) return b;
  throw InvalidArgument("no parameter block named " + std::string(name));
}

std::span<double> ParamVector::block(std::string_view name) {
  const auto& b = info(name);
  return {values_.data() + b.offset, b.size};
}

std::span<const double> ParamVector::block(std::string_view name) const {
  const auto& b = info(name);
  return {values_.data() + b.offset, b.size};
}

std::vector<double> ParamVector::step_multipliers() const {
  std::vector<double> m(values_.size(), 1.0);
  for (const auto& b : blocks_) std::fill_n(m.begin() + b.offset, b.size, b.step_multiplier);
  return m;
}

void ParamVector::assign(std::span<const double> v) {
  if (v.size() != values_.size())
    throw ShapeMismatch("parameter size " + std::to_string(v.size()) + " != " +
                        std::to_string(values_.size()));
  std::copy(v.begin(), v.end(), values_.begin());
}

bool ParamVector::operator==(const ParamVector& other) const {
  if (values_ != other.values_ || blocks_.size() != other.blocks_.size()) return false;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const auto &a = blocks_[i], &b = other.blocks_[i];
    if (a.name != b.name || a.offset != b.offset || a.size != b.size ||
        a.step_multiplier != b.step_multiplier)
      return false;
  }
  return true;
}

}  // namespace ebm
