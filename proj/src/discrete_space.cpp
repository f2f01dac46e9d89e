// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ebm/discrete_space.hpp"

#include <algorithm>
#include <limits>

#include "ebm/error.hpp"

namespace ebm {

namespace {
constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > kMax / a) return kMax;
  return a * b;
}
std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) { return b > kMax - a ? kMax : a + b; }
}  // namespace

DiscreteSpace DiscreteSpace::product(std::vector<int> cardinalities) {
  std::vector<std::vector<int>> values;
  for (int k : cardinalities) {
    if (k < 1) throw InvalidArgument("axis cardinality must be >= 1");
    std::vector<int> v(k);
    for (int i = 0; i < k; ++i) v[i] = i;
    values.push_back(std::move(v));
  }
  return product_values(std::move(values));
}

DiscreteSpace DiscreteSpace::product_values(std::vector<std::vector<int>> values) {
  DiscreteSpace s;
  for (const auto& v : values)
    if (v.empty()) throw InvalidArgument("axis with no values");
  s.axes_ = std::move(values);
  s.compute_size();
  return s;
}

DiscreteSpace DiscreteSpace::spins(int n) {
  return product_values(std::vector<std::vector<int>>(n, {-1, 1}));
}

DiscreteSpace DiscreteSpace::sequences(int vocab, int min_len, int max_len) {
  if (vocab < 1 || min_len < 1 || max_len < min_len)
    throw InvalidArgument("sequence space needs vocab >= 1 and 1 <= min_len <= max_len");
  DiscreteSpace s;
  s.trans_dim_ = true;
  s.vocab_ = vocab;
  s.min_len_ = min_len;
  s.max_len_ = max_len;
  s.compute_size();
  return s;
}

void DiscreteSpace::compute_size() {
  if (!trans_dim_) {
    size_ = 1;
    for (const auto& a : axes_) size_ = sat_mul(size_, a.size());
    return;
  }
  length_offsets_.clear();
  size_ = 0;
  std::uint64_t block = 1;
  for (int l = 1; l <= max_len_; ++l) {
    block = sat_mul(block, static_cast<std::uint64_t>(vocab_));
    if (l < min_len_) continue;
    length_offsets_.push_back(size_);
    size_ = sat_add(size_, block);
  }
}

void DiscreteSpace::check_cap(std::uint64_t cap) const {
  if (size_ > cap) throw EnumerationRefused(size_, cap);
}

Config DiscreteSpace::decode(std::uint64_t index) const {
  if (index >= size_) throw InvalidArgument("configuration index out of range");
  if (!trans_dim_) {
    Config x(axes_.size());
    for (std::size_t i = axes_.size(); i-- > 0;) {
      const auto n = axes_[i].size();
      x[i] = axes_[i][index % n];
      index /= n;
    }
    return x;
  }
  std::size_t b = length_offsets_.size() - 1;
  while (length_offsets_[b] > index) --b;
  const int len = min_len_ + static_cast<int>(b);
  std::uint64_t r = index - length_offsets_[b];
  Config x(len);
  for (int i = len; i-- > 0;) {
    x[i] = static_cast<int>(r % vocab_);
    r /= vocab_;
  }
  return x;
}

std::uint64_t DiscreteSpace::encode(std::span<const int> x) const {
  std::uint64_t idx = 0;
  if (!trans_dim_) {
    if (x.size() != axes_.size()) throw ShapeMismatch("configuration has wrong number of axes");
    for (std::size_t i = 0; i < axes_.size(); ++i) {
      const auto& a = axes_[i];
      auto it = std::find(a.begin(), a.end(), x[i]);
      if (it == a.end()) throw InvalidArgument("value not on axis");
      idx = idx * a.size() + static_cast<std::uint64_t>(it - a.begin());
    }
    return idx;
  }
  const int len = static_cast<int>(x.size());
  if (len < min_len_ || len > max_len_) throw InvalidArgument("sequence length outside space");
  for (int t : x) {
    if (t < 0 || t >= vocab_) throw InvalidArgument("token outside vocabulary");
    idx = idx * vocab_ + static_cast<std::uint64_t>(t);
  }
  return length_offsets_[len - min_len_] + idx;
}

void DiscreteSpace::for_each(const std::function<void(std::span<const int>)>& f,
                             std::uint64_t cap) const {
  check_cap(cap);
  for_range(0, size_, f);
}

void DiscreteSpace::for_range(std::uint64_t begin, std::uint64_t end,
                              const std::function<void(std::span<const int>)>& f) const {
  if (begin >= end) return;
  // Decode once, then step like an odometer.
  Config x = decode(begin);
  for (std::uint64_t idx = begin;;) {
    f(x);
    if (++idx == end) break;
    if (!trans_dim_) {
      for (std::size_t i = axes_.size(); i-- > 0;) {
        const auto& a = axes_[i];
        auto pos = static_cast<std::size_t>(std::find(a.begin(), a.end(), x[i]) - a.begin());
        if (pos + 1 < a.size()) {
          x[i] = a[pos + 1];
          break;
        }
        x[i] = a[0];
      }
    } else {
      bool carried = true;
      for (std::size_t i = x.size(); i-- > 0;) {
        if (x[i] + 1 < vocab_) {
          ++x[i];
          carried = false;
          break;
        }
        x[i] = 0;
      }
      if (carried) x.assign(x.size() + 1, 0);
    }
  }
}

}  // namespace ebm
