// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ebm/discrete_space.hpp"

namespace ebm {

// Sentence boundary symbols never appear inside a configuration; ordinary
// words use ids 0..V-1 so that sequence spaces enumerate words only.
inline constexpr int kBos = -1;
inline constexpr int kEos = -2;

class Vocab {
 public:
  Vocab() = default;
  explicit Vocab(const std::vector<std::string>& tokens);

  // Returns the existing id when the token is already present.
  int add(std::string_view token);
  bool contains(std::string_view token) const;
  // Unknown tokens map to the unk id when one is set, else InvalidArgument.
  int id(std::string_view token) const;
  const std::string& token(int id) const;
  int size() const { return int(tokens_.size()); }

  // Registers `token` (default "<unk>") as the target for OOV lookups.
  void set_unk(std::string_view token = "<unk>");
  int unk() const { return unk_; }

  // One token per line; line number is the id.
  static Vocab load(std::istream& in);
  void save(std::ostream& out) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
  int unk_ = -1;
};

// Whitespace-tokenized sentences, one per line; blank lines are skipped.
// With grow = true new tokens are added to the vocabulary.
std::vector<Config> read_corpus(std::istream& in, Vocab& vocab, bool grow);
std::vector<Config> parse_sentences(const std::vector<std::string>& lines, Vocab& vocab, bool grow);
std::string join_tokens(const Vocab& vocab, std::span<const int> sentence);

}  // namespace ebm
