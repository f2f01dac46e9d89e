// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <vector>

#include "ebm/seq/crf.hpp"
#include "ebm/seq/vocab.hpp"

namespace ebm {

// Two whitespace-separated columns (token, label) per line; a blank line ends
// a sentence. Lines starting with '#' are comments. With grow = true unseen
// tokens and labels are added; otherwise words fall back to the unk id and an
// unknown label throws. Malformed lines throw InvalidArgument naming the line.
std::vector<TaggedSentence> read_conll(std::istream& in, Vocab& words, Vocab& labels, bool grow);

void write_conll(std::ostream& out, const std::vector<TaggedSentence>& sentences, const Vocab& words,
                 const Vocab& labels);

}  // namespace ebm
