// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ebm/error.hpp"
#include "ebm/numeric.hpp"
#include "ebm/oracle.hpp"
#include "ebm/seq/conll.hpp"
#include "ebm/seq/crf.hpp"
#include "ebm/seq/crf_transducer.hpp"
#include "ebm/seq/ctc.hpp"
#include "ebm/seq/jrf.hpp"
#include "ebm/seq/tasks.hpp"
#include "ebm/seq/trf.hpp"

using namespace ebm;

namespace {

Matrix random_matrix(Rng& rng, std::size_t r, std::size_t c, double scale = 1.0) {
  Matrix m(r, c);
  for (auto& v : m.data) v = scale * rng.normal();
  return m;
}

// Direct sum over the labeling, written out independently of chain_score.
double brute_chain_score(const Matrix& phi, const Matrix& trans, std::span<const int> y) {
  const std::size_t K = phi.cols;
  double s = 0;
  for (std::size_t t = 0; t < y.size(); ++t) {
    const std::size_t prev = t == 0 ? K : std::size_t(y[t - 1]);
    s += phi(t, std::size_t(y[t])) + trans(prev, std::size_t(y[t]));
  }
  return s;
}

void for_each_labeling(int K, int T, const std::function<void(std::span<const int>)>& f) {
  DiscreteSpace::product(std::vector<int>(std::size_t(T), K)).for_each(f);
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  REQUIRE(a.size() == b.size());
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

ParamVector crf_params(LinearChainCrf& crf, std::uint64_t seed, double scale) {
  ParamVector p;
  crf.add_blocks(p);
  Rng rng(seed);
  crf.init(p, rng, scale);
  return p;
}

std::vector<int> random_words(Rng& rng, int V, std::size_t T) {
  std::vector<int> x(T);
  for (auto& w : x) w = int(rng.uniform_int(std::uint64_t(V)));
  return x;
}

bool same_labels(std::span<const int> a, std::span<const int> b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

// ---------------------------------------------------------------------------
// Chain dynamic programs

TEST_CASE("chain log partition of zero potentials is T log K") {
  for (int K : {1, 2, 5})
    for (int T : {1, 3, 6}) {
      const Matrix phi{std::size_t(T), std::size_t(K)}, trans{std::size_t(K + 1), std::size_t(K)};
      CHECK(chain_log_partition(phi, trans) == doctest::Approx(T * std::log(K)).epsilon(1e-14));
    }
}

TEST_CASE("forward-backward matches enumeration") {
  Rng rng(11);
  for (int K : {1, 2, 3})
    for (int T : {1, 2, 4}) {
      const auto phi = random_matrix(rng, std::size_t(T), std::size_t(K));
      const auto trans = random_matrix(rng, std::size_t(K + 1), std::size_t(K));
      LogSumExp acc;
      for_each_labeling(K, T, [&](std::span<const int> y) {
        CHECK(chain_score(phi, trans, y) == doctest::Approx(brute_chain_score(phi, trans, y)).epsilon(1e-14));
        acc.add(brute_chain_score(phi, trans, y));
      });
      const double log_z = acc.value();
      const auto post = chain_forward_backward(phi, trans);
      CHECK(std::abs(post.log_z - log_z) < 1e-12);
      CHECK(std::abs(post.log_z_backward - log_z) < 1e-12);
      CHECK(std::abs(chain_log_partition(phi, trans) - log_z) < 1e-12);

      Matrix node{std::size_t(T), std::size_t(K)};
      Matrix edges{std::size_t(K + 1), std::size_t(K)};
      for_each_labeling(K, T, [&](std::span<const int> y) {
        const double p = std::exp(brute_chain_score(phi, trans, y) - log_z);
        for (std::size_t t = 0; t < y.size(); ++t) {
          node(t, std::size_t(y[t])) += p;
          edges(t == 0 ? std::size_t(K) : std::size_t(y[t - 1]), std::size_t(y[t])) += p;
        }
      });
      CHECK(max_abs_diff(post.node.data, node.data) < 1e-12);
      CHECK(max_abs_diff(post.edge_counts.data, edges.data) < 1e-12);
      for (std::size_t t = 0; t < std::size_t(T); ++t) {
        double s = 0;
        for (std::size_t k = 0; k < std::size_t(K); ++k) s += post.node(t, k);
        CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
}

TEST_CASE("viterbi finds the enumerated optimum") {
  Rng rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    const int K = 1 + int(rng.uniform_int(3));
    const int T = 1 + int(rng.uniform_int(5));
    const auto phi = random_matrix(rng, std::size_t(T), std::size_t(K));
    const auto trans = random_matrix(rng, std::size_t(K + 1), std::size_t(K));
    double best = kNegInf;
    std::vector<int> arg;
    for_each_labeling(K, T, [&](std::span<const int> y) {
      const double s = brute_chain_score(phi, trans, y);
      if (s > best) {
        best = s;
        arg.assign(y.begin(), y.end());
      }
    });
    const auto d = chain_viterbi(phi, trans);
    CHECK(std::abs(d.score - best) < 1e-12);
    CHECK(same_labels(d.labels, arg));
  }
}

TEST_CASE("viterbi breaks ties toward the lexicographically smallest labeling") {
  const Matrix phi(4, 3), trans(4, 3);
  CHECK(chain_viterbi(phi, trans).labels == std::vector<int>{0, 0, 0, 0});
  // Labels 1 and 2 tie everywhere and beat 0.
  Matrix phi2(3, 3);
  for (std::size_t t = 0; t < 3; ++t) phi2(t, 1) = phi2(t, 2) = 1.0;
  CHECK(chain_viterbi(phi2, trans).labels == std::vector<int>{1, 1, 1});
}

// ---------------------------------------------------------------------------
// LinearChainCrf

TEST_CASE("CRF conditional log-likelihood gradient matches finite differences") {
  for (const CrfOptions opts : {CrfOptions{0, 0}, CrfOptions{1, 0}, CrfOptions{1, 4}}) {
    LinearChainCrf crf(4, 3, opts);
    auto params = crf_params(crf, 21, 0.5);
    Rng rng(22);
    std::vector<TaggedSentence> batch;
    for (std::size_t n = 0; n < 3; ++n) {
      const auto T = 1 + rng.uniform_int(4);
      TaggedSentence s{random_words(rng, 4, T), random_words(rng, 3, T)};
      batch.push_back(s);
    }
    const auto loss = crf_cml_loss(crf, params, batch);
    const auto fd = finite_diff_grad(
        [&](std::span<const double> theta) {
          ParamVector q = params;
          q.assign(theta);
          return crf_cml_loss(crf, q, batch).value;
        },
        params.values());
    const double tol = opts.hidden == 0 ? 1e-6 : 1e-4;
    CHECK(max_abs_diff(loss.gradient, fd) < tol);
  }
}

TEST_CASE("single-position CRF is softmax cross-entropy") {
  LinearChainCrf crf(5, 4, {1, 0});
  auto params = crf_params(crf, 31, 0.7);
  const std::vector<int> x{3};
  const auto phi = crf.node_potentials(params, x);
  const auto trans = crf.transitions(params);
  std::vector<double> logits(4);
  for (std::size_t k = 0; k < 4; ++k) logits[k] = phi(0, k) + trans(4, k);
  const auto lp = log_softmax(logits);
  for (int y = 0; y < 4; ++y) {
    const std::vector<int> ys{y};
    CHECK(crf.log_conditional(params, x, ys) == doctest::Approx(lp[std::size_t(y)]).epsilon(1e-12));
  }
}

TEST_CASE("CRF conditionals normalize and posteriors agree with the gradient") {
  LinearChainCrf crf(3, 2, {1, 3});
  auto params = crf_params(crf, 41, 0.8);
  const std::vector<int> x{0, 2, 1};
  LogSumExp acc;
  for_each_labeling(2, 3, [&](std::span<const int> y) { acc.add(crf.log_conditional(params, x, y)); });
  CHECK(std::abs(acc.value()) < 1e-12);

  // d log Z = E[dU] by enumeration.
  std::vector<double> g(params.size(), 0.0), e(params.size(), 0.0);
  crf.add_log_partition_grad(params, x, 1.0, g);
  for_each_labeling(2, 3, [&](std::span<const int> y) {
    crf.add_score_grad(params, x, y, std::exp(crf.log_conditional(params, x, y)), e);
  });
  CHECK(max_abs_diff(g, e) < 1e-12);
}

TEST_CASE("CRF training learns a separable tagging task") {
  Rng rng(51);
  const auto train = long_range_agreement_data(rng, 200);
  const auto test = long_range_agreement_data(rng, 200);
  LinearChainCrf crf(7, 4, {1, 0});
  ParamVector params;
  crf.add_blocks(params);
  CrfTrainConfig cfg;
  cfg.steps = 500;
  cfg.seed = 3;
  crf_cml_train(crf, params, train, cfg);
  // Everything except the closing label is determined by the window.
  CHECK(crf_accuracy(crf, params, test) > 0.85);
  const auto fitted = crf_cml_loss(crf, params, train);
  CHECK(fitted.value / double(train.size()) < 1.0);
}

TEST_CASE("CRF rejects out-of-range words and missing blocks") {
  LinearChainCrf crf(3, 2);
  ParamVector empty;
  const std::vector<int> x{0, 1};
  CHECK_THROWS(crf.log_partition(empty, x));
  ParamVector params;
  crf.add_blocks(params);
  const std::vector<int> bad{0, 3};
  CHECK_THROWS_AS(crf.log_partition(params, bad), InvalidArgument);
}

// ---------------------------------------------------------------------------
// CTC

TEST_CASE("collapse merges repeats then drops blanks") {
  CHECK(ctc_collapse(std::vector<int>{2, 0, 0, 2, 1, 1, 2, 1}, 2) == std::vector<int>{0, 1, 1});
  CHECK(ctc_collapse(std::vector<int>{2, 2}, 2).empty());
  CHECK(ctc_collapse(std::vector<int>{0, 0, 0}, 2) == std::vector<int>{0});
}

TEST_CASE("CTC lattice equals the sum over the collapse preimage") {
  Rng rng(61);
  for (int K : {1, 2, 3})
    for (int T = 1; T <= 5; ++T)
      for (int L = 0; L <= 3; ++L) {
        const auto labels = random_words(rng, K, std::size_t(L));
        const auto phi = random_matrix(rng, std::size_t(T), std::size_t(K + 1));
        LogSumExp acc;
        std::vector<std::pair<std::vector<int>, double>> paths;
        for_each_labeling(K + 1, T, [&](std::span<const int> pi) {
          if (!same_labels(ctc_collapse(pi, K), labels)) return;
          double s = 0;
          for (std::size_t t = 0; t < pi.size(); ++t) s += phi(t, std::size_t(pi[t]));
          acc.add(s);
          paths.emplace_back(std::vector<int>(pi.begin(), pi.end()), s);
        });
        const CtcLattice lattice(labels, K);
        const auto occ = lattice.forward_backward(phi);
        INFO("K=" << K << " T=" << T << " L=" << L);
        if (paths.empty()) {
          CHECK(occ.log_sum == kNegInf);
          CHECK(std::size_t(T) < lattice.min_frames());
          continue;
        }
        CHECK(std::size_t(T) >= lattice.min_frames());
        CHECK(std::abs(occ.log_sum - acc.value()) < 1e-12);
        Matrix post{std::size_t(T), std::size_t(K + 1)};
        for (const auto& [pi, s] : paths)
          for (std::size_t t = 0; t < pi.size(); ++t) post(t, std::size_t(pi[t])) += std::exp(s - acc.value());
        CHECK(max_abs_diff(occ.post.data, post.data) < 1e-12);
      }
}

TEST_CASE("CTC loss on small worked cases") {
  // T = 1: only the path (y) survives.
  const Matrix z1 = [] {
    Matrix m(1, 3);
    m(0, 0) = 0.3;
    m(0, 1) = -1.2;
    m(0, 2) = 0.5;
    return m;
  }();
  const auto lp1 = log_softmax(z1.row(0));
  CHECK(ctc_loss_grad(z1, std::vector<int>{1}).loss == doctest::Approx(-lp1[1]).epsilon(1e-14));

  // T = 2, y = (0): paths (0,0), (0,b), (b,0).
  Rng rng(62);
  const auto z2 = random_matrix(rng, 2, 3);
  const auto a = log_softmax(z2.row(0)), b = log_softmax(z2.row(1));
  const double p = std::exp(a[0] + b[0]) + std::exp(a[0] + b[2]) + std::exp(a[2] + b[0]);
  CHECK(ctc_loss_grad(z2, std::vector<int>{0}).loss == doctest::Approx(-std::log(p)).epsilon(1e-13));

  // A repeat needs a blank between, so (A, A) cannot fit in two frames.
  const auto r = ctc_loss_grad(z2, std::vector<int>{0, 0});
  CHECK_FALSE(r.feasible);
  CHECK(r.loss == kInf);
  for (double g : r.grad.data) CHECK(g == 0.0);
}

TEST_CASE("CTC gradient rows sum to zero and match finite differences") {
  Rng rng(63);
  for (int trial = 0; trial < 10; ++trial) {
    const int K = 1 + int(rng.uniform_int(3));
    const std::size_t T = 3 + rng.uniform_int(4);
    auto labels = random_words(rng, K, 1 + rng.uniform_int(2));
    const auto z = random_matrix(rng, T, std::size_t(K + 1));
    const auto r = ctc_loss_grad(z, labels);
    REQUIRE(r.feasible);
    for (std::size_t t = 0; t < T; ++t) {
      double s = 0;
      for (double g : r.grad.row(t)) s += g;
      CHECK(std::abs(s) < 1e-12);
    }
    const auto fd = finite_diff_grad(
        [&](std::span<const double> theta) {
          Matrix m = z;
          std::copy(theta.begin(), theta.end(), m.data.begin());
          return ctc_loss_grad(m, labels).loss;
        },
        z.data);
    CHECK(max_abs_diff(r.grad.data, fd) < 1e-7);
  }
}

TEST_CASE("CTC satisfies the Fisher identity by path enumeration") {
  Rng rng(64);
  for (int trial = 0; trial < 5; ++trial) {
    const auto z = random_matrix(rng, 4, 3);
    const CtcPathModel model(z);
    for (const auto& y : {std::vector<int>{0}, std::vector<int>{0, 1}, std::vector<int>{1, 1}})
      CHECK(fisher_equality_check(model, y) < 1e-10);
  }
}

// ---------------------------------------------------------------------------
// Label LM and denominator graph

TEST_CASE("label LM uses add-one estimates with an end symbol") {
  LabelLm lm(2, 2);
  lm.fit({{0, 1}, {0}});
  const std::vector<int> start{LabelLm::kStart};
  // After <s>: 0 seen twice out of 2 events, 3 outcomes.
  CHECK(std::exp(lm.log_prob(start, 0)) == doctest::Approx(3.0 / 5.0));
  CHECK(std::exp(lm.log_prob(start, 2)) == doctest::Approx(1.0 / 5.0));
  const std::vector<int> h1{1};
  CHECK(std::exp(lm.log_prob(h1, 2)) == doctest::Approx(2.0 / 4.0));
  CHECK(lm.sequence_log_prob(std::vector<int>{0}) ==
        doctest::Approx(std::log(3.0 / 5.0) + std::log(2.0 / 5.0)));
  // Unseen history falls back to uniform.
  LabelLm lm3(2, 3);
  lm3.fit({{0, 1}});
  const std::vector<int> h{1, 1};
  CHECK(std::exp(lm3.log_prob(h, 0)) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("denominator graph path weight is the LM score of the collapsed path") {
  Rng rng(71);
  for (int K : {1, 2, 3})
    for (int order : {1, 2, 3}) {
      std::vector<std::vector<int>> transcripts;
      for (int n = 0; n < 20; ++n) transcripts.push_back(random_words(rng, K, 1 + rng.uniform_int(4)));
      LabelLm lm(K, order);
      lm.fit(transcripts);
      const DenominatorGraph graph(lm);
      INFO("K=" << K << " order=" << order << " states=" << graph.num_states());
      CHECK(graph.num_states() <= DenominatorGraph::state_bound(K, order));
      const int T = K == 3 ? 3 : 4;
      for_each_labeling(K + 1, T, [&](std::span<const int> pi) {
        const auto y = ctc_collapse(pi, K);
        CHECK(std::abs(graph.path_weight(pi) - lm.sequence_log_prob(y)) < 1e-12);
      });
    }
}

TEST_CASE("denominator forward-backward and best path match enumeration") {
  Rng rng(72);
  for (int order : {1, 2}) {
    const int K = 2, T = 3;
    LabelLm lm(K, order);
    lm.fit({{0, 1, 1}, {1}, {0, 0}});
    const DenominatorGraph graph(lm);
    const auto phi = random_matrix(rng, T, K + 1);
    LogSumExp acc;
    Matrix post(T, K + 1);
    std::vector<std::pair<std::vector<int>, double>> paths;
    double best = kNegInf;
    std::vector<int> arg;
    for_each_labeling(K + 1, T, [&](std::span<const int> pi) {
      double s = graph.path_weight(pi);
      for (std::size_t t = 0; t < pi.size(); ++t) s += phi(t, std::size_t(pi[t]));
      acc.add(s);
      paths.emplace_back(std::vector<int>(pi.begin(), pi.end()), s);
      if (s > best) {
        best = s;
        arg.assign(pi.begin(), pi.end());
      }
    });
    const auto occ = graph.forward_backward(phi);
    CHECK(std::abs(occ.log_sum - acc.value()) < 1e-12);
    for (const auto& [pi, s] : paths)
      for (std::size_t t = 0; t < pi.size(); ++t) post(t, std::size_t(pi[t])) += std::exp(s - acc.value());
    CHECK(max_abs_diff(occ.post.data, post.data) < 1e-12);
    CHECK(graph.best_path(phi) == arg);
  }
}

TEST_CASE("unigram denominator over T = 3, K = 2") {
  LabelLm lm(2, 1);
  lm.fit({{0, 0, 1}});
  const DenominatorGraph graph(lm);
  CHECK(graph.num_states() <= DenominatorGraph::state_bound(2, 1));
  const Matrix phi(3, 3);
  // With zero node potentials the sum is over paths of p_LM(collapse(path)).
  LogSumExp acc;
  for_each_labeling(3, 3, [&](std::span<const int> pi) { acc.add(lm.sequence_log_prob(ctc_collapse(pi, 2))); });
  CHECK(std::abs(graph.forward_backward(phi).log_sum - acc.value()) < 1e-12);
}

// ---------------------------------------------------------------------------
// CTC-CRF

TEST_CASE("CTC-CRF with a flat label LM reduces to CTC") {
  Rng rng(81);
  for (int trial = 0; trial < 10; ++trial) {
    const int K = 2 + int(rng.uniform_int(2));
    const auto z = random_matrix(rng, 5, std::size_t(K + 1));
    Matrix phi(z.rows, z.cols);
    for (std::size_t t = 0; t < z.rows; ++t) {
      const auto r = log_softmax(z.row(t));
      std::copy(r.begin(), r.end(), phi.row(t).begin());
    }
    const DenominatorGraph flat(LabelLm::flat(K, 2));
    const auto y = random_words(rng, K, 1 + rng.uniform_int(3));
    const auto ctc = ctc_loss_grad(z, y);
    const auto crf = ctc_crf_loss_grad(phi, y, flat);
    REQUIRE(ctc.feasible);
    CHECK(std::abs(crf.loss - ctc.loss) < 1e-10);
    CHECK(std::abs(crf.log_denominator) < 1e-10);
  }
}

TEST_CASE("CTC-CRF conditionals sum to one over label sequences") {
  Rng rng(82);
  const int K = 2, T = 4;
  LabelLm lm(K, 2);
  lm.fit({{0, 1}, {1, 1, 0}, {0}});
  const DenominatorGraph graph(lm);
  const auto phi = random_matrix(rng, T, K + 1);
  double total = std::exp(-ctc_crf_loss_grad(phi, std::vector<int>{}, graph).loss);
  DiscreteSpace::sequences(K, 1, T).for_each([&](std::span<const int> y) {
    const auto r = ctc_crf_loss_grad(phi, y, graph);
    if (r.feasible) total += std::exp(-r.loss);
  });
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("CTC-CRF gradient matches finite differences") {
  Rng rng(83);
  LabelLm lm(3, 2);
  lm.fit({{0, 1, 2}, {2, 1}, {0, 0}});
  const DenominatorGraph graph(lm);
  for (int trial = 0; trial < 5; ++trial) {
    const auto phi = random_matrix(rng, 5, 4);
    const auto y = random_words(rng, 3, 1 + rng.uniform_int(3));
    const auto r = ctc_crf_loss_grad(phi, y, graph);
    REQUIRE(r.feasible);
    const auto fd = finite_diff_grad(
        [&](std::span<const double> theta) {
          Matrix m = phi;
          std::copy(theta.begin(), theta.end(), m.data.begin());
          return ctc_crf_loss_grad(m, y, graph).loss;
        },
        phi.data);
    CHECK(max_abs_diff(r.grad.data, fd) < 1e-5);
  }
}

// ---------------------------------------------------------------------------
// CRF transducer

namespace {

CrfTransducer small_transducer(PotentialDesign design, std::size_t hidden = 3) {
  TransducerOptions o;
  o.window = 1;
  o.transcription_hidden = hidden;
  o.embedding = 3;
  o.prediction_hidden = 4;
  o.design = design;
  return CrfTransducer(4, 3, o);
}

}  // namespace

TEST_CASE("transducer with zero parameters scores every labeling 0") {
  auto model = small_transducer(PotentialDesign::kA);
  ParamVector params;
  model.add_blocks(params);
  const std::vector<int> x{0, 1, 2, 3};
  for_each_labeling(3, 4, [&](std::span<const int> y) { CHECK(model.score(params, x, y) == 0.0); });
  CHECK(crft_exact_loss(model, params, x, std::vector<int>{0, 1, 2, 0}) ==
        doctest::Approx(4 * std::log(3.0)).epsilon(1e-14));
}

TEST_CASE("design B potentials are locally normalized") {
  auto model = small_transducer(PotentialDesign::kB);
  ParamVector params;
  model.add_blocks(params);
  Rng rng(91);
  model.init(params, rng, 0.8);
  const std::vector<int> x{1, 3, 0};
  const auto phi = model.node_potentials(params, x);
  for (std::size_t t = 0; t < phi.rows; ++t) CHECK(std::abs(log_sum_exp(phi.row(t))) < 1e-12);
  auto p = model.start(params);
  for (int k : {2, 0, 1}) {
    const auto psi = model.clique_potentials(params, p);
    CHECK(std::abs(log_sum_exp(psi)) < 1e-12);
    p = model.extend(params, phi, p, k, psi);
  }
}

TEST_CASE("transducer conditionals normalize and incremental scores agree") {
  for (auto design : {PotentialDesign::kA, PotentialDesign::kB}) {
    auto model = small_transducer(design);
    ParamVector params;
    model.add_blocks(params);
    Rng rng(92);
    model.init(params, rng, 0.8);
    const std::vector<int> x{2, 0, 3};
    double total = 0;
    for_each_labeling(3, 3, [&](std::span<const int> y) { total += std::exp(-crft_exact_loss(model, params, x, y)); });
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

    const auto phi = model.node_potentials(params, x);
    const std::vector<int> y{1, 1, 2};
    auto p = model.start(params);
    for (std::size_t i = 0; i < y.size(); ++i) {
      p = model.extend(params, phi, p, y[i], model.clique_potentials(params, p));
      const std::span<const int> prefix(y.data(), i + 1);
      CHECK(std::abs(p.score - model.score(params, x, prefix)) < 1e-12);
    }
  }
}

TEST_CASE("transducer score gradient matches finite differences") {
  for (auto design : {PotentialDesign::kA, PotentialDesign::kB})
    for (std::size_t hidden : {std::size_t(0), std::size_t(3)}) {
      auto model = small_transducer(design, hidden);
      ParamVector params;
      model.add_blocks(params);
      Rng rng(93);
      model.init(params, rng, 0.7);
      const std::vector<int> x{3, 1, 0, 2}, y{0, 2, 2, 1};
      std::vector<double> g(params.size(), 0.0);
      model.add_score_grad(params, x, y, 1.0, g);
      const auto fd = finite_diff_grad(
          [&](std::span<const double> theta) {
            ParamVector q = params;
            q.assign(theta);
            return model.score(q, x, y);
          },
          params.values());
      CHECK(max_abs_diff(g, fd) < 1e-6);
    }
}

TEST_CASE("exhaustive beam reproduces the exact loss") {
  auto model = small_transducer(PotentialDesign::kA);
  ParamVector params;
  model.add_blocks(params);
  Rng rng(94);
  model.init(params, rng, 0.8);
  const std::vector<int> x{0, 3, 1, 2}, y{2, 0, 1, 1};
  const auto eu = crft_early_update_loss(model, params, x, y, 81);
  CHECK_FALSE(eu.early);
  CHECK(eu.step == 4);
  CHECK(std::abs(eu.loss - crft_exact_loss(model, params, x, y)) < 1e-10);
  // The beam holds every labeling in score order.
  const auto beam = crft_beam(model, params, x, 81);
  CHECK(beam.size() == 81);
  for (std::size_t i = 1; i < beam.size(); ++i) CHECK(beam[i - 1].score >= beam[i].score);

  const auto fd = finite_diff_grad(
      [&](std::span<const double> theta) {
        ParamVector q = params;
        q.assign(theta);
        return crft_exact_loss(model, q, x, y);
      },
      params.values());
  CHECK(max_abs_diff(eu.gradient, fd) < 1e-6);
}

TEST_CASE("early update with width 1") {
  auto model = small_transducer(PotentialDesign::kA);
  ParamVector params;
  model.add_blocks(params);
  Rng rng(95);
  model.init(params, rng, 0.8);
  const std::vector<int> x{1, 2, 3, 0};
  const auto greedy = crft_decode(model, params, x, 1);
  REQUIRE(greedy.size() == 4);
  // An oracle that greedy search keeps is alone in its beam.
  const auto kept = crft_early_update_loss(model, params, x, greedy, 1);
  CHECK_FALSE(kept.early);
  CHECK(kept.loss == doctest::Approx(0.0).epsilon(1e-14));

  auto y = greedy;
  y[2] = (y[2] + 1) % 3;
  const auto fell = crft_early_update_loss(model, params, x, y, 1);
  CHECK(fell.early);
  CHECK(fell.step == 3);
  CHECK(fell.loss > 0);
}

TEST_CASE("transducer beats the CRF on long-range agreement") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto r = run_long_range_comparison(seed);
    INFO("seed " << seed << " crf " << r.crf_accuracy << " crft " << r.transducer_accuracy);
    CHECK(r.transducer_accuracy >= r.crf_accuracy + 0.05);
  }
}

// ---------------------------------------------------------------------------
// JRF

TEST_CASE("JRF marginal potential sums the CRF over labelings") {
  LinearChainCrf crf(3, 2, {1, 0});
  JrfModel jrf(crf, {0.2, 0.3, 0.5});
  Rng rng(101);
  jrf.init(rng, 0.6);
  const std::vector<int> x{2, 0, 1};
  LogSumExp acc;
  for_each_labeling(2, 3, [&](std::span<const int> y) { acc.add(jrf.crf().score(jrf.params(), x, y)); });
  CHECK(std::abs(jrf_marginal_potential(jrf, x) - acc.value()) < 1e-12);
  CHECK(std::abs(jrf.potential(x) - (std::log(0.5) + acc.value())) < 1e-12);

  JrfModel zero(crf, {0.2, 0.3, 0.5});
  CHECK(jrf_marginal_potential(zero, x) == doctest::Approx(3 * std::log(2.0)).epsilon(1e-14));
  // The initial zeta is exact at zero parameters.
  const auto exact = zero.exact_log_normalizers();
  for (std::size_t l = 0; l < exact.size(); ++l) CHECK(std::abs(zero.params().block("zeta")[l] - exact[l]) < 1e-12);
}

TEST_CASE("JRF joint factors into marginal times conditional") {
  LinearChainCrf crf(3, 2, {0, 0});
  JrfModel jrf(crf, {0.25, 0.75});
  Rng rng(102);
  jrf.init(rng, 0.7);
  const auto log_z = jrf.exact_log_normalizers();
  jrf.set_zeta(log_z);
  double total = 0;
  jrf.space().for_each([&](std::span<const int> x) {
    double marg = 0;
    for_each_labeling(2, int(x.size()), [&](std::span<const int> y) {
      CHECK(std::abs(jrf.log_joint(x, y) - jrf.log_marginal(x) - jrf.log_conditional(x, y)) < 1e-12);
      marg += std::exp(jrf.log_joint(x, y));
    });
    CHECK(std::abs(std::log(marg) - jrf.log_marginal(x)) < 1e-12);
    total += marg;
  });
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("JRF model gradient matches finite differences") {
  LinearChainCrf crf(3, 2, {1, 3});
  JrfModel jrf(crf, {0.5, 0.5});
  Rng rng(103);
  jrf.init(rng, 0.6);
  const std::vector<int> x{1, 2};
  std::vector<double> g(jrf.num_params(), 0.0);
  jrf.add_potential_grad(x, 1.0, g);
  CHECK(max_abs_diff(g, finite_diff_grad(jrf, x)) < 1e-6);

  // log_model subtracts zeta_l, so its gradient there is -1.
  std::vector<double> lg(jrf.num_params(), 0.0);
  jrf.add_log_model_grad(x, 1.0, lg);
  const auto& z = jrf.params().info("zeta");
  CHECK(lg[z.offset] == 0.0);
  CHECK(lg[z.offset + 1] == -1.0);
}

TEST_CASE("JRF training with alpha 0 is supervised CRF training") {
  Rng rng(104);
  const auto hmm = random_hmm(rng, 6, 3);
  std::vector<TaggedSentence> labeled;
  for (int i = 0; i < 20; ++i) labeled.push_back(sample_hmm(hmm, rng, 5));

  LinearChainCrf crf(6, 3);
  JrfModel jrf(crf, {0.25, 0.25, 0.25, 0.25});
  BigramNoise noise(6, {0.25, 0.25, 0.25, 0.25});
  JrfSemiConfig jc;
  jc.steps = 50;
  jc.alpha = 0;
  jc.seed = 9;
  jrf_semi_train(jrf, labeled, {}, noise, jc);

  ParamVector params;
  LinearChainCrf plain = crf;
  plain.add_blocks(params);
  CrfTrainConfig cc;
  cc.steps = 50;
  cc.lr = jc.lr;
  cc.l2 = jc.l2;
  cc.seed = 9;
  crf_cml_train(plain, params, labeled, cc);
  const auto a = jrf.params().values().first(params.size());
  CHECK(std::equal(a.begin(), a.end(), params.values().begin(), params.values().end()));
}

TEST_CASE("JRF uses unlabeled text to beat supervised CRF") {
  for (std::uint64_t seed : {1, 2}) {
    const auto r = run_jrf_ssl_comparison(seed);
    INFO("seed " << seed << " sup " << r.supervised_accuracy << " jrf " << r.semi_supervised_accuracy);
    CHECK(r.semi_supervised_accuracy > r.supervised_accuracy);
  }
}

// ---------------------------------------------------------------------------
// Tasks and CoNLL

TEST_CASE("edit distance") {
  CHECK(edit_distance(std::vector<int>{}, std::vector<int>{1, 2}) == 2);
  CHECK(edit_distance(std::vector<int>{1, 2, 3}, std::vector<int>{1, 2, 3}) == 0);
  CHECK(edit_distance(std::vector<int>{1, 2, 3}, std::vector<int>{2, 3, 4}) == 2);
  CHECK(edit_distance(std::vector<int>{1, 3}, std::vector<int>{1, 2, 3}) == 1);
}

TEST_CASE("noiseless frame data decodes to its transcript") {
  FrameTaskOptions o;
  o.noise = 0;
  Rng rng(111);
  for (const auto& u : bigram_frame_data(rng, 50, o)) {
    CHECK(ctc_greedy_decode(u.features) == u.labels);
    CHECK(u.labels.size() >= 3);
    CHECK(u.labels.size() <= 6);
    CHECK(u.features.rows >= CtcLattice(u.labels, o.labels).min_frames());
  }
}

TEST_CASE("CTC-CRF beats CTC on bigram frame data") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto r = run_ctc_crf_comparison(seed);
    INFO("seed " << seed << " ctc " << r.ctc_error << " ctc-crf " << r.ctc_crf_error);
    CHECK(r.ctc_crf_error < r.ctc_error);
  }
}

TEST_CASE("CoNLL round trip") {
  const std::string text = "# comment\nthe\tDET\ncat\tNOUN\n\nruns VERB\n\n";
  std::istringstream in(text);
  Vocab words, labels;
  const auto sents = read_conll(in, words, labels, true);
  REQUIRE(sents.size() == 2);
  CHECK(sents[0].words.size() == 2);
  CHECK(sents[1].labels == std::vector<int>{labels.id("VERB")});
  std::ostringstream out;
  write_conll(out, sents, words, labels);
  CHECK(out.str() == "the\tDET\ncat\tNOUN\n\nruns\tVERB\n\n");
  std::istringstream again(out.str());
  const auto back = read_conll(again, words, labels, false);
  REQUIRE(back.size() == 2);
  CHECK(back[0].words == sents[0].words);
  CHECK(back[1].labels == sents[1].labels);
}

TEST_CASE("CoNLL errors name the line") {
  Vocab words, labels;
  std::istringstream bad("a X\nb Y Z\n");
  try {
    read_conll(bad, words, labels, true);
    FAIL("expected InvalidArgument");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
  words.set_unk();
  std::istringstream unknown("a NEW\n");
  CHECK_THROWS_AS(read_conll(unknown, words, labels, false), InvalidArgument);
}
