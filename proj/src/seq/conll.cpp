// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ebm/seq/conll.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "ebm/error.hpp"

namespace ebm {

std::vector<TaggedSentence> read_conll(std::istream& in, Vocab& words, Vocab& labels, bool grow) {
  std::vector<TaggedSentence> out;
  TaggedSentence cur;
  std::string line;
  std::size_t lineno = 0;
  auto flush = [&] {
    if (!cur.words.empty()) out.push_back(std::move(cur));
    cur = {};
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream fields(line);
    std::string token, label, extra;
    if (!(fields >> token)) {
      flush();
      continue;
    }
    if (token.front() == '#') continue;
    if (!(fields >> label) || (fields >> extra))
      throw InvalidArgument("read_conll: line " + std::to_string(lineno) + " needs exactly two columns");
    cur.words.push_back(grow ? words.add(token) : words.id(token));
    if (grow) {
      cur.labels.push_back(labels.add(label));
    } else if (labels.contains(label)) {
      cur.labels.push_back(labels.id(label));
    } else {
      throw InvalidArgument("read_conll: unknown label '" + label + "' on line " + std::to_string(lineno));
    }
  }
  flush();
  return out;
}

void write_conll(std::ostream& out, const std::vector<TaggedSentence>& sentences, const Vocab& words,
                 const Vocab& labels) {
  for (const auto& s : sentences) {
    if (s.words.size() != s.labels.size()) throw ShapeMismatch("write_conll: label length differs from sentence");
    for (std::size_t t = 0; t < s.words.size(); ++t)
      out << words.token(s.words[t]) << '\t' << labels.token(s.labels[t]) << '\n';
    out << '\n';
  }
}

}  // namespace ebm
