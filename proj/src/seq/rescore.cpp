// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ebm/seq/rescore.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "ebm/error.hpp"

namespace ebm {

std::vector<RescoredEntry> rescore_nbest(const std::vector<NbestEntry>& nbest,
                                         const std::function<double(std::span<const int>)>& model_score,
                                         double weight) {
  if (!(weight >= 0 && weight <= 1)) throw InvalidArgument("rescore_nbest: weight must lie in [0, 1]");
  std::vector<RescoredEntry> out;
  for (std::size_t i = 0; i < nbest.size(); ++i) {
    RescoredEntry r{nbest[i], i, 0.0, 0.0};
    // Skip the model entirely at weight 0 so the ALM order is kept exactly.
    r.model_score = weight > 0 ? model_score(nbest[i].sentence) : 0.0;
    r.combined = weight > 0 ? (1 - weight) * nbest[i].alm_score + weight * r.model_score : nbest[i].alm_score;
    out.push_back(std::move(r));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const RescoredEntry& a, const RescoredEntry& b) { return a.combined > b.combined; });
  return out;
}

std::vector<NbestEntry> read_nbest(std::istream& in, Vocab& vocab, bool grow) {
  std::vector<NbestEntry> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string id, score, text;
    if (!std::getline(ss, id, '\t') || !std::getline(ss, score, '\t') || !std::getline(ss, text))
      throw InvalidArgument("n-best line " + std::to_string(lineno) + ": expected three tab-separated fields");
    NbestEntry e;
    e.utterance = id;
    try {
      e.alm_score = std::stod(score);
    } catch (const std::exception&) {
      throw InvalidArgument("n-best line " + std::to_string(lineno) + ": bad score '" + score + "'");
    }
    auto s = parse_sentences({text}, vocab, grow);
    if (!s.empty()) e.sentence = std::move(s.front());
    out.push_back(std::move(e));
  }
  return out;
}

void write_nbest(std::ostream& out, const Vocab& vocab, const std::vector<RescoredEntry>& ranked) {
  out << "utterance\toriginal_rank\talm_score\tmodel_score\tcombined\tsentence\n";
  for (const auto& r : ranked)
    out << r.entry.utterance << '\t' << r.original_rank << '\t' << r.entry.alm_score << '\t' << r.model_score
        << '\t' << r.combined << '\t' << join_tokens(vocab, r.entry.sentence) << '\n';
}

}  // namespace ebm
