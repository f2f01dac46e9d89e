// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ebm/seq/vocab.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include "ebm/error.hpp"

namespace ebm {

Vocab::Vocab(const std::vector<std::string>& tokens) {
  for (const auto& t : tokens) add(t);
}

int Vocab::add(std::string_view token) {
  if (token.empty()) throw InvalidArgument("vocab: empty token");
  auto it = ids_.find(std::string(token));
  if (it != ids_.end()) return it->second;
  const int id = int(tokens_.size());
  tokens_.emplace_back(token);
  ids_.emplace(tokens_.back(), id);
  return id;
}

bool Vocab::contains(std::string_view token) const { return ids_.count(std::string(token)) > 0; }

int Vocab::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  if (it != ids_.end()) return it->second;
  if (unk_ >= 0) return unk_;
  throw InvalidArgument("vocab: unknown token '" + std::string(token) + "'");
}

const std::string& Vocab::token(int id) const {
  if (id < 0 || id >= size()) throw InvalidArgument("vocab: id out of range: " + std::to_string(id));
  return tokens_[std::size_t(id)];
}

void Vocab::set_unk(std::string_view token) { unk_ = add(token); }

Vocab Vocab::load(std::istream& in) {
  Vocab v;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (v.contains(line)) throw InvalidArgument("vocab: duplicate token '" + line + "'");
    v.add(line);
  }
  if (v.contains("<unk>")) v.unk_ = v.id("<unk>");
  return v;
}

void Vocab::save(std::ostream& out) const {
  for (const auto& t : tokens_) out << t << '\n';
}

std::vector<Config> parse_sentences(const std::vector<std::string>& lines, Vocab& vocab, bool grow) {
  std::vector<Config> out;
  for (const auto& line : lines) {
    std::istringstream ss(line);
    Config s;
    std::string tok;
    while (ss >> tok) s.push_back(grow ? vocab.add(tok) : vocab.id(tok));
    if (!s.empty()) out.push_back(std::move(s));
  }
  return out;
}

std::vector<Config> read_corpus(std::istream& in, Vocab& vocab, bool grow) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return parse_sentences(lines, vocab, grow);
}

std::string join_tokens(const Vocab& vocab, std::span<const int> sentence) {
  std::string out;
  for (int w : sentence) {
    if (!out.empty()) out += ' ';
    out += w == kBos ? "<s>" : w == kEos ? "</s>" : vocab.token(w);
  }
  return out;
}

}  // namespace ebm
