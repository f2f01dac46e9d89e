// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace ebm {

inline constexpr std::uint64_t kDefaultEnumerationCap = std::uint64_t{1} << 24;

using Config = std::vector<int>;

// A finite configuration space: either a product of per-coordinate value
// lists, or the union over lengths lo..hi of V^l (token sequences).
class DiscreteSpace {
 public:
  // Coordinate i takes values 0..cards[i]-1.
  static DiscreteSpace product(std::vector<int> cardinalities);
  // Coordinate i takes the listed values.
  static DiscreteSpace product_values(std::vector<std::vector<int>> values);
  static DiscreteSpace binary(int n) { return product(std::vector<int>(n, 2)); }
  static DiscreteSpace spins(int n);
  // All sequences over {0..vocab-1} with length in [min_len, max_len].
  static DiscreteSpace sequences(int vocab, int min_len, int max_len);

  bool trans_dimensional() const { return trans_dim_; }
  // Saturates at UINT64_MAX.
  std::uint64_t size() const { return size_; }
  // Throws EnumerationRefused if size() > cap.
  void check_cap(std::uint64_t cap) const;

  Config decode(std::uint64_t index) const;
  std::uint64_t encode(std::span<const int> x) const;

  // Visits every configuration exactly once in index order.
  void for_each(const std::function<void(std::span<const int>)>& f,
                std::uint64_t cap = kDefaultEnumerationCap) const;
  // Visits indices [begin, end).
  void for_range(std::uint64_t begin, std::uint64_t end,
                 const std::function<void(std::span<const int>)>& f) const;

  std::size_t num_axes() const { return axes_.size(); }
  const std::vector<int>& axis_values(std::size_t i) const { return axes_[i]; }
  int vocab() const { return vocab_; }
  int min_length() const { return min_len_; }
  int max_length() const { return max_len_; }

 private:
  void compute_size();
  std::vector<std::vector<int>> axes_;
  bool trans_dim_ = false;
  int vocab_ = 0, min_len_ = 0, max_len_ = 0;
  std::vector<std::uint64_t> length_offsets_;  // start index of each length block
  std::uint64_t size_ = 0;
};

}  // namespace ebm
