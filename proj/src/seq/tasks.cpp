// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ebm/seq/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "ebm/error.hpp"
#include "ebm/optim.hpp"
#include "ebm/seq/crf_transducer.hpp"
#include "ebm/seq/ctc.hpp"
#include "ebm/seq/jrf.hpp"
#include "ebm/seq/ngram_alm.hpp"
#include "ebm/seq/trf.hpp"

namespace ebm {

std::size_t edit_distance(std::span<const int> a, std::span<const int> b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] != b[j - 1])});
    prev.swap(cur);
  }
  return prev[b.size()];
}

// ---------------------------------------------------------------------------

std::vector<TaggedSentence> long_range_agreement_data(Rng& rng, std::size_t n) {
  std::vector<TaggedSentence> out;
  for (std::size_t i = 0; i < n; ++i) {
    TaggedSentence s;
    const int open = int(rng.uniform_int(2));
    const int len = 4 + int(rng.uniform_int(4));
    s.words.push_back(open);
    s.labels.push_back(open);
    for (int t = 1; t < len - 1; ++t) {
      const int w = 2 + int(rng.uniform_int(4));
      s.words.push_back(w);
      s.labels.push_back(w < 4 ? 2 : 3);
    }
    s.words.push_back(6);
    s.labels.push_back(open);
    out.push_back(std::move(s));
  }
  return out;
}

LongRangeResult run_long_range_comparison(std::uint64_t seed, const LongRangeOptions& opts) {
  Rng rng(seed, 100);
  const auto train = long_range_agreement_data(rng, opts.train);
  const auto test = long_range_agreement_data(rng, opts.test);
  LongRangeResult r;

  LinearChainCrf crf(7, 4, {1, 0});
  ParamVector cp;
  crf.add_blocks(cp);
  CrfTrainConfig cc;
  cc.steps = opts.crf_steps;
  cc.batch = 10;
  cc.seed = seed;
  crf_cml_train(crf, cp, train, cc);
  r.crf_accuracy = crf_accuracy(crf, cp, test);

  TransducerOptions to;
  to.window = 1;
  to.transcription_hidden = 0;
  to.embedding = 4;
  to.prediction_hidden = 8;
  CrfTransducer model(7, 4, to);
  ParamVector mp;
  model.add_blocks(mp);
  Rng init(seed, 101);
  model.init(mp, init, 0.3);
  TransducerTrainConfig tc;
  tc.steps = opts.transducer_steps;
  tc.batch = 8;
  tc.width = opts.width;
  tc.lr = 0.02;
  tc.seed = seed;
  crft_train_beam(model, mp, train, tc);
  r.transducer_accuracy = crft_accuracy(model, mp, test, opts.width);
  return r;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> normalized(std::vector<double> w) {
  double s = 0;
  for (double v : w) s += v;
  for (auto& v : w) v /= s;
  return w;
}

}  // namespace

Hmm random_hmm(Rng& rng, int vocab, int labels, double emission_spread) {
  if (vocab < 1 || labels < 1) throw InvalidArgument("random_hmm: empty vocabulary or label set");
  Hmm h;
  h.vocab = vocab;
  h.labels = labels;
  h.start.assign(std::size_t(labels), 1.0 / labels);
  for (int k = 0; k < labels; ++k) {
    std::vector<double> a(static_cast<std::size_t>(labels)), b(static_cast<std::size_t>(vocab));
    for (int j = 0; j < labels; ++j) a[std::size_t(j)] = (j == (k + 1) % labels ? 6.0 : 1.0) * rng.uniform(0.5, 1.5);
    for (auto& v : b) v = std::exp(emission_spread * rng.normal());
    h.transition.push_back(normalized(a));
    h.emission.push_back(normalized(b));
  }
  return h;
}

TaggedSentence sample_hmm(const Hmm& hmm, Rng& rng, int max_len) {
  if (max_len < 2) throw InvalidArgument("sample_hmm: max_len must be at least 2");
  TaggedSentence s;
  const int len = 2 + int(rng.uniform_int(std::uint64_t(max_len - 1)));
  auto y = rng.categorical(hmm.start);
  for (int t = 0; t < len; ++t) {
    if (t > 0) y = rng.categorical(hmm.transition[y]);
    s.labels.push_back(int(y));
    s.words.push_back(int(rng.categorical(hmm.emission[y])));
  }
  return s;
}

SslResult run_jrf_ssl_comparison(std::uint64_t seed, const SslOptions& opts) {
  Rng rng(seed, 200);
  const auto hmm = random_hmm(rng, opts.vocab, opts.labels);
  std::vector<TaggedSentence> labeled, test;
  std::vector<std::vector<int>> unlabeled;
  for (std::size_t i = 0; i < opts.labeled; ++i) labeled.push_back(sample_hmm(hmm, rng, opts.max_len));
  for (std::size_t i = 0; i < opts.labeled * opts.unlabeled_ratio; ++i)
    unlabeled.push_back(sample_hmm(hmm, rng, opts.max_len).words);
  for (std::size_t i = 0; i < opts.test; ++i) test.push_back(sample_hmm(hmm, rng, opts.max_len));

  const LinearChainCrf crf(opts.vocab, opts.labels);
  const std::vector<Config> corpus(unlabeled.begin(), unlabeled.end());
  const auto pi = length_probabilities(corpus, opts.max_len);
  SslResult r;

  ParamVector sp;
  LinearChainCrf sup = crf;
  sup.add_blocks(sp);
  CrfTrainConfig cc;
  cc.steps = opts.steps;
  cc.batch = 10;
  cc.seed = seed;
  crf_cml_train(sup, sp, labeled, cc);
  r.supervised_accuracy = crf_accuracy(sup, sp, test);

  JrfModel jrf(crf, pi);
  NgramAlm alm(2, opts.vocab);
  alm.fit(corpus);
  BigramNoise noise(opts.vocab, pi);
  noise.init_from(alm);
  JrfSemiConfig jc;
  jc.steps = opts.steps;
  jc.alpha = opts.alpha;
  jc.seed = seed;
  jrf_semi_train(jrf, labeled, unlabeled, noise, jc);
  r.semi_supervised_accuracy = crf_accuracy(jrf.crf(), jrf.params(), test);
  return r;
}

// ---------------------------------------------------------------------------

std::vector<FrameUtterance> bigram_frame_data(Rng& rng, std::size_t n, const FrameTaskOptions& opts) {
  const int K = opts.labels;
  if (K < 2) throw InvalidArgument("bigram_frame_data: need at least two labels");
  std::vector<FrameUtterance> out;
  for (std::size_t i = 0; i < n; ++i) {
    FrameUtterance u;
    const int len = 3 + int(rng.uniform_int(4));
    int y = int(rng.uniform_int(std::uint64_t(K)));
    for (int j = 0; j < len; ++j) {
      if (j > 0) {
        const int other = int(rng.uniform_int(std::uint64_t(K - 1)));
        y = rng.bernoulli(opts.stickiness) ? (y + 1) % K : (other >= (y + 1) % K ? other + 1 : other);
      }
      u.labels.push_back(y);
    }
    std::vector<int> path;
    if (rng.bernoulli(0.5)) path.push_back(K);
    for (std::size_t j = 0; j < u.labels.size(); ++j) {
      if (j > 0 && (u.labels[j] == u.labels[j - 1] || rng.bernoulli(0.5))) path.push_back(K);
      const int frames = 1 + int(rng.uniform_int(2));
      for (int f = 0; f < frames; ++f) path.push_back(u.labels[j]);
    }
    if (rng.bernoulli(0.5)) path.push_back(K);
    u.features = Matrix(path.size(), std::size_t(K + 1));
    for (std::size_t t = 0; t < path.size(); ++t)
      for (std::size_t k = 0; k <= std::size_t(K); ++k)
        u.features(t, k) = (int(k) == path[t] ? 1.0 : 0.0) + opts.noise * rng.normal();
    out.push_back(std::move(u));
  }
  return out;
}

namespace {

// logits = features W^T + b; W is (K + 1) x (K + 1), then b.
struct FrameNet {
  std::size_t dim;
  std::vector<double> theta;

  explicit FrameNet(std::size_t d) : dim(d), theta(d * d + d, 0.0) {}

  Matrix logits(const Matrix& x) const {
    Matrix z(x.rows, dim);
    for (std::size_t t = 0; t < x.rows; ++t)
      for (std::size_t k = 0; k < dim; ++k) {
        double s = theta[dim * dim + k];
        for (std::size_t j = 0; j < dim; ++j) s += theta[k * dim + j] * x(t, j);
        z(t, k) = s;
      }
    return z;
  }

  std::vector<double> grad(const Matrix& x, const Matrix& dz) const {
    std::vector<double> g(theta.size(), 0.0);
    for (std::size_t t = 0; t < x.rows; ++t)
      for (std::size_t k = 0; k < dim; ++k) {
        g[dim * dim + k] += dz(t, k);
        for (std::size_t j = 0; j < dim; ++j) g[k * dim + j] += dz(t, k) * x(t, j);
      }
    return g;
  }
};

Matrix log_softmax_rows(const Matrix& z) {
  Matrix out(z.rows, z.cols);
  for (std::size_t t = 0; t < z.rows; ++t) {
    const auto r = log_softmax(z.row(t));
    std::copy(r.begin(), r.end(), out.row(t).begin());
  }
  return out;
}

double token_error(const std::vector<FrameUtterance>& data,
                   const std::function<std::vector<int>(const Matrix&)>& decode) {
  std::size_t errors = 0, total = 0;
  for (const auto& u : data) {
    errors += edit_distance(decode(u.features), u.labels);
    total += u.labels.size();
  }
  return double(errors) / double(total);
}

}  // namespace

CtcComparison run_ctc_crf_comparison(std::uint64_t seed, const FrameTaskOptions& opts) {
  Rng rng(seed, 300);
  const auto train = bigram_frame_data(rng, opts.train, opts);
  const auto test = bigram_frame_data(rng, opts.test, opts);
  const auto dim = std::size_t(opts.labels + 1);

  std::vector<std::vector<int>> transcripts;
  for (const auto& u : train) transcripts.push_back(u.labels);
  LabelLm lm(opts.labels, 2);
  lm.fit(transcripts);
  const DenominatorGraph graph(lm);

  auto train_net = [&](bool crf) {
    FrameNet net(dim);
    Adam adam(opts.lr);
    Rng order(seed, 301);
    for (std::size_t e = 0; e < opts.epochs; ++e)
      for (std::size_t i = 0; i < train.size(); ++i) {
        const auto& u = train[order.uniform_int(train.size())];
        const auto z = net.logits(u.features);
        Matrix dz;
        if (crf) {
          // phi = log_softmax(z): dL/dz = dL/dphi - softmax(z) * sum_k dL/dphi.
          const auto phi = log_softmax_rows(z);
          const auto r = ctc_crf_loss_grad(phi, u.labels, graph);
          if (!r.feasible) continue;
          dz = r.grad;
          for (std::size_t t = 0; t < z.rows; ++t) {
            double s = 0;
            for (std::size_t k = 0; k < dim; ++k) s += r.grad(t, k);
            for (std::size_t k = 0; k < dim; ++k) dz(t, k) -= std::exp(phi(t, k)) * s;
          }
        } else {
          const auto r = ctc_loss_grad(z, u.labels);
          if (!r.feasible) continue;
          dz = r.grad;
        }
        adam.descend(net.theta, net.grad(u.features, dz));
      }
    return net;
  };

  CtcComparison out;
  const auto ctc = train_net(false);
  out.ctc_error = token_error(test, [&](const Matrix& x) { return ctc_greedy_decode(ctc.logits(x)); });
  const auto ctc_crf = train_net(true);
  out.ctc_crf_error = token_error(test, [&](const Matrix& x) {
    return ctc_collapse(graph.best_path(log_softmax_rows(ctc_crf.logits(x))), opts.labels);
  });
  return out;
}

}  // namespace ebm
