// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

// Criteria 1-4 and 11: enumeration oracles, gradients, samplers, learners
// and the appendix identities.

#include <algorithm>
#include <cmath>

#include "ebm/harness/acceptance.hpp"
#include "ebm/learners.hpp"
#include "ebm/models/ising.hpp"
#include "ebm/models/jem.hpp"
#include "ebm/models/log_linear.hpp"
#include "ebm/models/rbm.hpp"
#include "ebm/numeric.hpp"
#include "ebm/oracle.hpp"
#include "ebm/samplers.hpp"
#include "ebm/seq/crf.hpp"
#include "ebm/seq/crf_transducer.hpp"
#include "ebm/seq/ctc.hpp"
#include "ebm/seq/jrf.hpp"
#include "ebm/seq/ngram_alm.hpp"
#include "ebm/seq/ngram_features.hpp"
#include "ebm/seq/poe.hpp"
#include "ebm/seq/trf.hpp"

namespace ebm::harness {

namespace {

// Largest value seen; NaN sticks.
struct Worst {
  double value = 0;
  void add(double e) {
    if (!(e <= value)) value = e;
  }
};

double rel_err(double a, double b) {
  if (a == b) return 0;  // matching infinities
  return std::abs(a - b) / std::max(1.0, std::abs(b));
}

Matrix random_matrix(Rng& rng, std::size_t r, std::size_t c, double scale = 1.0) {
  Matrix m(r, c);
  for (auto& v : m.data) v = scale * rng.normal();
  return m;
}

std::vector<int> random_ids(Rng& rng, int n, std::size_t len) {
  std::vector<int> x(len);
  for (auto& w : x) w = int(rng.uniform_int(std::uint64_t(n)));
  return x;
}

DiscreteSpace labelings(int k, std::size_t t) { return DiscreteSpace::product(std::vector<int>(t, k)); }

NgramFeatureSet bigram_features(int vocab) {
  NgramFeatureSet f(feature_templates("w", 2), {true, false});
  std::vector<Config> corpus;
  DiscreteSpace::sequences(vocab, 1, 2).for_each([&](std::span<const int> x) { corpus.emplace_back(x.begin(), x.end()); });
  f.index(corpus);
  return f;
}

// Singletons plus two adjacent pairs on three bits.
LogLinearModel three_bit_model() {
  return LogLinearModel(5, [](std::span<const int> x, SparseFeatures& f) {
    for (int i = 0; i < 3; ++i) f.push_back({std::size_t(i), double(x[i])});
    f.push_back({3, double(x[0] * x[1])});
    f.push_back({4, double(x[1] * x[2])});
  });
}

class UniformNoise : public DiscreteDistribution {
 public:
  explicit UniformNoise(DiscreteSpace s) : s_(std::move(s)) {}
  Config sample(Rng& rng) const override { return s_.decode(rng.uniform_int(s_.size())); }
  double log_prob(std::span<const int>) const override { return -std::log(double(s_.size())); }

 private:
  DiscreteSpace s_;
};

// U given by a lookup table over a single coordinate.
class TableModel : public EnergyModel {
 public:
  explicit TableModel(const std::vector<double>& u) {
    params_.add_block("u", u.size());
    params_.assign(u);
  }
  double potential(std::span<const int> x) const override { return params_[std::size_t(x[0])]; }
  void add_potential_grad(std::span<const int> x, double s, std::span<double> g) const override {
    g[std::size_t(x[0])] += s;
  }
};

class TableDistribution : public DiscreteDistribution {
 public:
  explicit TableDistribution(std::vector<double> logp) : logp_(std::move(logp)) {}
  Config sample(Rng& rng) const override { return {int(rng.categorical_log(logp_))}; }
  double log_prob(std::span<const int> x) const override { return logp_[std::size_t(x[0])]; }

 private:
  std::vector<double> logp_;
};

// Fields plus neighbor-pair tables on a chain of n variables.
class PottsChain : public EnergyModel {
 public:
  PottsChain(int n, int card, Rng& r) : n_(std::size_t(n)), card_(std::size_t(card)) {
    params_.add_block("field", n_ * card_);
    params_.add_block("pair", (n_ - 1) * card_ * card_);
    for (auto& v : params_.values()) v = r.uniform(-1, 1);
  }
  double potential(std::span<const int> x) const override {
    double u = 0;
    for (std::size_t i = 0; i < n_; ++i) u += params_[i * card_ + std::size_t(x[i])];
    for (std::size_t i = 0; i + 1 < n_; ++i)
      u += params_[n_ * card_ + (i * card_ + std::size_t(x[i])) * card_ + std::size_t(x[i + 1])];
    return u;
  }
  void add_potential_grad(std::span<const int> x, double s, std::span<double> g) const override {
    for (std::size_t i = 0; i < n_; ++i) g[i * card_ + std::size_t(x[i])] += s;
    for (std::size_t i = 0; i + 1 < n_; ++i)
      g[n_ * card_ + (i * card_ + std::size_t(x[i])) * card_ + std::size_t(x[i + 1])] += s;
  }

 private:
  std::size_t n_, card_;
};

double sampled_tv(const EnergyModel& target, const DiscreteSpace& space,
                  const std::function<void(DiscreteChain&)>& kernel, Config start, std::uint64_t steps,
                  std::uint64_t seed) {
  DiscreteChain chain{std::move(start), 0, Rng(seed), {}};
  const auto samples = collect_samples(kernel, chain, steps);
  return tv_distance(empirical_distribution(space, samples), enumerate_probabilities(target, space));
}

std::vector<Config> draw(const EnergyModel& m, const DiscreteSpace& space, std::size_t n, std::uint64_t seed) {
  const auto p = enumerate_probabilities(m, space);
  Rng rng(seed);
  std::vector<Config> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(space.decode(rng.categorical(p)));
  return out;
}

double linf_diff(std::span<const double> a, std::span<const double> b) {
  Worst w;
  for (std::size_t i = 0; i < a.size(); ++i) w.add(std::abs(a[i] - b[i]));
  return w.value;
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<Check> criterion_oracle_equivalence(std::uint64_t seed) {
  Rng rng(seed, 1);
  std::vector<Check> out;
  constexpr double kTol = 1e-8;
  const std::string rel = "relative error |a - b| / max(|b|, 1)";

  {  // CRF forward log Z, including one instance at 4^10 = 2^20 labelings
    Worst w;
    for (int trial = 0; trial <= 20; ++trial) {
      const int K = trial == 20 ? 4 : 2 + int(rng.uniform_int(3));
      const std::size_t T = trial == 20 ? 10 : 2 + rng.uniform_int(5);
      const auto phi = random_matrix(rng, T, std::size_t(K), 1.5);
      const auto trans = random_matrix(rng, std::size_t(K + 1), std::size_t(K), 1.5);
      LogSumExp acc;
      labelings(K, T).for_each([&](std::span<const int> y) {
        double s = 0;
        for (std::size_t t = 0; t < T; ++t)
          s += phi(t, std::size_t(y[t])) + trans(t ? std::size_t(y[t - 1]) : std::size_t(K), std::size_t(y[t]));
        acc.add(s);
      });
      const auto post = chain_forward_backward(phi, trans);
      w.add(rel_err(post.log_z, acc.value()));
      w.add(rel_err(post.log_z_backward, acc.value()));
    }
    out.push_back(check_le("crf log Z vs enumeration", w.value, kTol, rel));
  }

  {  // TRF normalization with linear and neural potentials
    Worst w;
    for (int v : {3, 4, 5})
      for (int len : {3, 4})
        for (std::size_t hidden : {std::size_t(0), std::size_t(3)}) {
          std::vector<double> pi(std::size_t(len), 1.0 / len);
          TrfModel trf(SequencePotential(bigram_features(v), v, hidden), pi);
          for (auto& x : trf.params().block("lambda")) x = rng.uniform(-1, 1);
          if (hidden) trf.init_neural(rng, 0.5);
          trf.set_zeta(trf.exact_log_normalizers());
          std::vector<double> mass(std::size_t(len), 0.0);
          trf.space().for_each([&](std::span<const int> x) { mass[x.size() - 1] += std::exp(trf_log_prob(trf, x)); });
          for (int l = 0; l < len; ++l) w.add(rel_err(mass[std::size_t(l)], pi[std::size_t(l)]));
        }
    out.push_back(check_le("trf normalization", w.value, kTol, "mass of each length equals pi_l"));
  }

  {  // CTC path sums against the collapse preimage
    Worst w;
    for (int K = 1; K <= 3; ++K)
      for (std::size_t T = 1; T <= 6; ++T)
        for (std::size_t L = 1; L <= 3; ++L) {
          const auto labels = random_ids(rng, K, L);
          const auto phi = random_matrix(rng, T, std::size_t(K + 1));
          LogSumExp acc;
          labelings(K + 1, T).for_each([&](std::span<const int> p) {
            const auto y = ctc_collapse(p, K);
            if (!std::equal(y.begin(), y.end(), labels.begin(), labels.end())) return;
            double s = 0;
            for (std::size_t t = 0; t < T; ++t) s += phi(t, std::size_t(p[t]));
            acc.add(s);
          });
          w.add(rel_err(CtcLattice(labels, K).forward_backward(phi).log_sum, acc.value()));
        }
    out.push_back(check_le("ctc path sum vs enumeration", w.value, kTol, rel));
  }

  {  // CTC-CRF denominator and conditionals
    Worst den, mass;
    for (int trial = 0; trial < 8; ++trial) {
      const int K = 2 + trial % 2;
      const std::size_t T = 3 + std::size_t(trial % 3);
      std::vector<std::vector<int>> transcripts;
      for (int n = 0; n < 10; ++n) transcripts.push_back(random_ids(rng, K, 1 + rng.uniform_int(3)));
      LabelLm lm(K, 2);
      lm.fit(transcripts);
      const DenominatorGraph graph(lm);
      const auto phi = random_matrix(rng, T, std::size_t(K + 1));
      LogSumExp acc;
      labelings(K + 1, T).for_each([&](std::span<const int> p) {
        double s = lm.sequence_log_prob(ctc_collapse(p, K));
        for (std::size_t t = 0; t < T; ++t) s += phi(t, std::size_t(p[t]));
        acc.add(s);
      });
      den.add(rel_err(graph.forward_backward(phi).log_sum, acc.value()));
      double total = std::exp(-ctc_crf_loss_grad(phi, std::vector<int>{}, graph).loss);
      DiscreteSpace::sequences(K, 1, int(T)).for_each([&](std::span<const int> y) {
        const auto r = ctc_crf_loss_grad(phi, y, graph);
        if (r.feasible) total += std::exp(-r.loss);
      });
      mass.add(rel_err(total, 1.0));
    }
    out.push_back(check_le("ctc-crf denominator vs enumeration", den.value, kTol, rel));
    out.push_back(check_le("ctc-crf conditionals sum to 1", mass.value, kTol));
  }

  {  // RBM likelihood against the joint (v, h) space, up to 2^20 states
    Worst w;
    for (int trial = 0; trial < 6; ++trial) {
      const int d = trial == 5 ? 10 : 5, h = trial == 5 ? 10 : 4;
      Rbm rbm(d, h);
      Rng r(seed, 100 + std::uint64_t(trial));
      rbm.randomize(r, 1.0);
      const double log_z = enumerate_log_z(
          [&](std::span<const int> vh) {
            return rbm.joint_potential(vh.first(std::size_t(d)), vh.subspan(std::size_t(d)));
          },
          DiscreteSpace::binary(d + h));
      std::vector<Config> data;
      double oracle = 0;
      for (int n = 0; n < 3; ++n) {
        auto v = random_ids(rng, 2, std::size_t(d));
        LogSumExp lh;
        DiscreteSpace::binary(h).for_each([&](std::span<const int> hh) { lh.add(rbm.joint_potential(v, hh)); });
        oracle += (lh.value() - log_z) / 3;
        data.push_back(std::move(v));
      }
      w.add(rel_err(rbm_log_z_exact(rbm), log_z));
      w.add(rel_err(rbm_loglik_exact(rbm, data), oracle));
    }
    out.push_back(check_le("rbm log-likelihood vs joint enumeration", w.value, kTol, rel));
  }

  {  // JRF marginal and joint normalization
    Worst w;
    LinearChainCrf crf(3, 2, {1, 0});
    JrfModel jrf(crf, {0.2, 0.3, 0.5});
    jrf.init(rng, 0.6);
    jrf.set_zeta(jrf.exact_log_normalizers());
    double total = 0;
    jrf.space().for_each([&](std::span<const int> x) {
      LogSumExp acc;
      labelings(2, x.size()).for_each([&](std::span<const int> y) {
        acc.add(jrf.crf().score(jrf.params(), x, y));
        total += std::exp(jrf.log_joint(x, y));
      });
      w.add(rel_err(jrf.marginal_potential(x), acc.value()));
    });
    w.add(rel_err(total, 1.0));
    out.push_back(check_le("jrf marginal and joint mass", w.value, kTol, rel));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<Check> criterion_gradient_suite(std::uint64_t seed) {
  Rng rng(seed, 2);
  constexpr int kInstances = 50;
  constexpr double kLinear = 1e-6, kNonlinear = 1e-4;
  const std::string note = "max relative error over 50 instances";
  std::vector<Check> out;
  auto fd_of = [](const auto& f, std::span<const double> theta) { return finite_diff_grad(f, theta); };

  for (const bool neural : {false, true}) {
    Worst w;
    for (int i = 0; i < kInstances; ++i) {
      LinearChainCrf crf(4, 3, {1, neural ? std::size_t(4) : std::size_t(0)});
      ParamVector params;
      crf.add_blocks(params);
      crf.init(params, rng, 0.5);
      std::vector<TaggedSentence> batch;
      for (int n = 0; n < 3; ++n) {
        const auto T = 1 + rng.uniform_int(4);
        batch.push_back({random_ids(rng, 4, T), random_ids(rng, 3, T)});
      }
      const auto g = crf_cml_loss(crf, params, batch).gradient;
      const auto fd = fd_of(
          [&](std::span<const double> theta) {
            ParamVector q = params;
            q.assign(theta);
            return crf_cml_loss(crf, q, batch).value;
          },
          params.values());
      w.add(max_relative_error(g, fd));
    }
    if (neural)
      out.push_back(check_le("crf cml (neural potentials)", w.value, kNonlinear, note));
    else
      out.push_back(check_le("crf cml (linear potentials)", w.value, kLinear, note));
  }

  {
    Worst w;
    for (int i = 0; i < kInstances; ++i) {
      const int K = 1 + int(rng.uniform_int(3));
      const auto z = random_matrix(rng, 4 + rng.uniform_int(3), std::size_t(K + 1));
      const auto y = random_ids(rng, K, 1 + rng.uniform_int(2));
      const auto r = ctc_loss_grad(z, y);
      const auto fd = fd_of(
          [&](std::span<const double> theta) {
            Matrix m = z;
            std::copy(theta.begin(), theta.end(), m.data.begin());
            return ctc_loss_grad(m, y).loss;
          },
          z.data);
      w.add(max_relative_error(r.grad.data, fd));
    }
    out.push_back(check_le("ctc loss wrt logits", w.value, kNonlinear, note));
  }

  {
    Worst w;
    LabelLm lm(3, 2);
    lm.fit({{0, 1, 2}, {2, 1}, {0, 0}, {1}});
    const DenominatorGraph graph(lm);
    for (int i = 0; i < kInstances; ++i) {
      const auto phi = random_matrix(rng, 4 + rng.uniform_int(2), 4);
      const auto y = random_ids(rng, 3, 1 + rng.uniform_int(2));
      const auto r = ctc_crf_loss_grad(phi, y, graph);
      const auto fd = fd_of(
          [&](std::span<const double> theta) {
            Matrix m = phi;
            std::copy(theta.begin(), theta.end(), m.data.begin());
            return ctc_crf_loss_grad(m, y, graph).loss;
          },
          phi.data);
      w.add(max_relative_error(r.grad.data, fd));
    }
    out.push_back(check_le("ctc-crf loss wrt potentials", w.value, kLinear, note));
  }

  {
    const auto space = DiscreteSpace::binary(3);
    UniformNoise uniform(space);
    Worst nce, dnce;
    for (int i = 0; i < kInstances; ++i) {
      auto m = three_bit_model();
      m.enable_zeta(1, rng.uniform(-1, 1));
      for (auto& w : m.weights()) w = rng.uniform(-1, 1);
      std::vector<Config> pos, neg;
      for (int n = 0; n < 10; ++n) pos.push_back(uniform.sample(rng));
      for (int n = 0; n < 40; ++n) neg.push_back(uniform.sample(rng));
      const std::vector<double> pw(pos.size(), 1.0 / 10), nw(neg.size(), 1.0 / 10);
      const auto theta = std::vector<double>(m.params().values().begin(), m.params().values().end());
      const auto g = nce_objective(m, uniform, 4.0, pos, pw, neg, nw).gradient;
      const auto fd = fd_of(
          [&](std::span<const double> t) {
            auto probe = m;
            probe.params().assign(t);
            return nce_objective(probe, uniform, 4.0, pos, pw, neg, nw).value;
          },
          theta);
      nce.add(max_relative_error(g, fd));

      SoftmaxTable q(space);
      std::vector<Config> skew;
      for (int n = 0; n < 3; ++n) skew.push_back(uniform.sample(rng));
      q.mle_step(skew, 3.0);
      std::vector<Config> b1, b2;
      for (int n = 0; n < 10; ++n) b1.push_back(q.sample(rng));
      for (int n = 0; n < 40; ++n) b2.push_back(q.sample(rng));
      const auto gd = dnce_objective(m, q, 4.0, 0.5, pos, b1, b2).gradient;
      const auto fdd = fd_of(
          [&](std::span<const double> t) {
            auto probe = m;
            probe.params().assign(t);
            return dnce_objective(probe, q, 4.0, 0.5, pos, b1, b2).value;
          },
          theta);
      dnce.add(max_relative_error(gd, fdd));
    }
    out.push_back(check_le("nce objective (log-linear)", nce.value, kLinear, note));
    out.push_back(check_le("dnce objective (log-linear)", dnce.value, kLinear, note));
  }

  {
    Worst trf_w, jrf_w, rbm_w;
    for (int i = 0; i < kInstances; ++i) {
      TrfModel trf(SequencePotential(bigram_features(4), 4, 3), {0.3, 0.3, 0.4});
      trf.init_neural(rng, 0.5);
      for (auto& x : trf.params().block("lambda")) x = rng.uniform(-1, 1);
      const auto x = random_ids(rng, 4, 1 + rng.uniform_int(3));
      std::vector<double> g(trf.num_params(), 0.0);
      trf.add_potential_grad(x, 1.0, g);
      trf_w.add(max_relative_error(g, finite_diff_grad(trf, x)));

      JrfModel jrf(LinearChainCrf(3, 2, {1, 3}), {0.5, 0.5});
      jrf.init(rng, 0.6);
      const auto xj = random_ids(rng, 3, 1 + rng.uniform_int(2));
      std::vector<double> gj(jrf.num_params(), 0.0);
      jrf.add_potential_grad(xj, 1.0, gj);
      jrf_w.add(max_relative_error(gj, finite_diff_grad(jrf, xj)));

      Rbm rbm(4, 3);
      rbm.randomize(rng, 1.0);
      const auto v = random_ids(rng, 2, 4);
      std::vector<double> gr(rbm.num_params(), 0.0);
      rbm.add_potential_grad(v, 1.0, gr);
      rbm_w.add(max_relative_error(gr, finite_diff_grad(rbm, v)));
    }
    out.push_back(check_le("trf neural potential", trf_w.value, kNonlinear, note));
    out.push_back(check_le("jrf marginal potential (neural crf)", jrf_w.value, kNonlinear, note));
    out.push_back(check_le("rbm free energy", rbm_w.value, kNonlinear, note));
  }

  {
    Worst w;
    for (int i = 0; i < kInstances; ++i) {
      TransducerOptions o;
      o.transcription_hidden = i % 2 ? 3 : 0;
      o.embedding = 3;
      o.prediction_hidden = 4;
      o.design = i % 3 ? PotentialDesign::kA : PotentialDesign::kB;
      CrfTransducer model(4, 3, o);
      ParamVector params;
      model.add_blocks(params);
      model.init(params, rng, 0.7);
      const auto T = 1 + rng.uniform_int(4);
      const auto x = random_ids(rng, 4, T), y = random_ids(rng, 3, T);
      std::vector<double> g(params.size(), 0.0);
      model.add_score_grad(params, x, y, 1.0, g);
      const auto fd = fd_of(
          [&](std::span<const double> theta) {
            ParamVector q = params;
            q.assign(theta);
            return model.score(q, x, y);
          },
          params.values());
      w.add(max_relative_error(g, fd));
    }
    out.push_back(check_le("crf transducer score", w.value, kNonlinear, note));
  }

  {
    Worst w;
    const Grid2D grid{{-2, -2}, {2, 2}, 6};
    for (int i = 0; i < kInstances; ++i) {
      JemModel jem(2, 3, FeatureMap::kQuadratic, i % 2 ? std::vector<std::size_t>{4} : std::vector<std::size_t>{});
      jem.init(rng, 0.5);
      std::vector<LabeledPoint> labeled;
      std::vector<std::vector<double>> unlabeled;
      for (int n = 0; n < 3; ++n) labeled.push_back({{rng.uniform(-2, 2), rng.uniform(-2, 2)}, int(rng.uniform_int(3))});
      for (int n = 0; n < 4; ++n) unlabeled.push_back({rng.uniform(-2, 2), rng.uniform(-2, 2)});
      const double alpha = i % 2 ? 0.7 : 0.0;
      const auto obj = jem_ssl_objective(jem, labeled, unlabeled, alpha, grid);
      const std::vector<double> theta(jem.params().values().begin(), jem.params().values().end());
      const auto fd = fd_of(
          [&](std::span<const double> t) {
            JemModel probe = jem;
            probe.params().assign(t);
            return jem_ssl_objective(probe, labeled, unlabeled, alpha, grid).value;
          },
          theta);
      w.add(max_relative_error(obj.gradient, fd));
    }
    out.push_back(check_le("jem grid objective", w.value, kNonlinear, note));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<Check> criterion_samplers(std::uint64_t seed) {
  std::vector<Check> out;
  constexpr double kTv = 0.03;
  const std::vector<double> three = {0.2, -0.5, 1.1};
  const auto space3 = DiscreteSpace::product({3});
  TableModel target(three);

  {
    SingleSiteProposal prop({3});
    out.push_back(check_le("mh random walk, 3 states", sampled_tv(target, space3, [&](DiscreteChain& c) { mh_step(target, prop, c); }, {0}, 300000, seed * 10 + 1), kTv, "TV vs enumeration"));
  }
  {
    TableDistribution q(std::vector<double>(3, -std::log(3.0)));
    IndependentProposal prop(q);
    out.push_back(check_le("independence sampler, 3 states", sampled_tv(target, space3, [&](DiscreteChain& c) { mis_step(target, prop, c); }, {0}, 300000, seed * 10 + 2), kTv, "TV vs enumeration"));
  }
  {
    EnumeratedConditionals fc(target, space3);
    out.push_back(check_le("gibbs, 3 states", sampled_tv(target, space3, [&](DiscreteChain& c) { gibbs_sweep(fc, c); }, {0}, 200000, seed * 10 + 3), kTv, "TV vs enumeration"));
  }
  {
    Rng r(seed, 30);
    PottsChain model(4, 2, r);
    const auto space = DiscreteSpace::product(std::vector<int>(4, 2));
    EnumeratedConditionals fc(model, space);
    out.push_back(check_le("gibbs random scan, 4-site chain", sampled_tv(model, space, [&](DiscreteChain& c) { gibbs_sweep(fc, c, ScanOrder::kRandom); }, Config(4, 0), 200000, seed * 10 + 4), kTv, "TV vs enumeration"));
  }
  {
    const IsingModel ising(3, 1.0, 0.0, 0.4);
    const auto run = ising_sample_grid(ising, 300000, seed * 10 + 5, 1, 0.0);
    const auto space = DiscreteSpace::spins(9);
    out.push_back(check_le("gibbs, 3x3 ising", tv_distance(empirical_distribution(space, run.snapshots), enumerate_probabilities(ising, space)), kTv, "TV vs enumeration"));
  }
  {
    NgramAlm alm(2, 5);
    alm.fit({{0, 1, 2, 3}, {1, 2, 3, 4}, {0, 0, 1, 1}, {4, 3, 2, 1}, {2, 2, 4, 0}});
    const Config source = {0, 1, 2, 3};
    PoeTarget poe({fluency_expert(alm, 1.0), keyword_expert(4, 2.0, 1.0), hamming_expert(source, 0.5)});
    const auto space = DiscreteSpace::product(std::vector<int>(4, 5));
    UniformWordProposal prop(5);
    out.push_back(check_le("mh-within-gibbs, product of experts |V|=5 T=4", sampled_tv(poe, space, [&](DiscreteChain& c) { mh_within_gibbs_sweep(poe, prop, c); }, source, 200000, seed * 10 + 6), kTv, "TV vs enumeration"));
  }
  {
    // Apply each site kernel of one sweep to the enumerated law.
    Rng r(seed, 31);
    PottsChain model(6, 3, r);
    const auto space = DiscreteSpace::product(std::vector<int>(6, 3));
    EnumeratedConditionals fc(model, space);
    const auto p = enumerate_probabilities(model, space);
    std::vector<double> v = p, w(3);
    for (std::size_t site = 0; site < 6; ++site) {
      std::vector<double> next(v.size(), 0.0);
      space.for_each([&](std::span<const int> x) {
        const double mass = v[space.encode(x)];
        fc.conditional_log_weights(x, site, w);
        const auto c = softmax(w);
        Config y(x.begin(), x.end());
        for (int k = 0; k < 3; ++k) {
          y[site] = k;
          next[space.encode(y)] += mass * c[std::size_t(k)];
        }
      });
      v = std::move(next);
    }
    out.push_back(check_le("gibbs sweep invariance, 729 states", linf_diff(v, p), 1e-10, "max |pK - p|"));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<Check> criterion_learners(std::uint64_t seed) {
  std::vector<Check> out;
  const std::vector<double> truth_params = {0.5, -0.3, 0.8, -0.6, 0.4};
  const auto space = DiscreteSpace::binary(3);
  auto truth = three_bit_model();
  truth.params().assign(truth_params);
  const double log_z = enumerate_log_z(truth, space);
  // NCE and DNCE run on one fixed draw: with 50k samples even the exact MLE
  // is a few hundredths from the truth, so the 0.05 margin is per instance.
  constexpr std::uint64_t kDataSeed = 2024, kLearnerSeed = 1;
  const auto data = draw(truth, space, 50000, kDataSeed);
  {
    // Moment matching on the empirical feature means.
    auto mle = three_bit_model();
    std::vector<double> emp(5, 0.0);
    for (const auto& x : data)
      for (auto [k, v] : mle.features(x)) emp[k] += v / double(data.size());
    for (int it = 0; it < 3000; ++it) {
      const auto model = enumerate_grad_log_z(mle, space);
      for (std::size_t k = 0; k < 5; ++k) mle.weights()[k] += 2.0 * (emp[k] - model[k]);
    }
    out.push_back(info("exact mle parameter error (l-inf)", linf_diff(mle.weights(), truth_params),
                       "sampling floor of this draw"));
  }

  {
    auto nce = three_bit_model();
    NceConfig cfg;
    cfg.nu = 10;
    cfg.steps = 5000;
    cfg.batch = 100;
    cfg.l2 = 0;
    cfg.average_tail = 0.5;
    cfg.seed = kLearnerSeed;
    UniformNoise noise(space);
    nce_train(nce, data, noise, cfg);
    out.push_back(check_le("nce |zeta - log Z|", std::abs(nce.params().block("zeta")[0] - log_z), 0.05, "nu=10, 50k samples"));
    out.push_back(check_le("nce parameter error (l-inf)", linf_diff(nce.weights(), truth_params), 0.05));
  }
  {
    auto dnce = three_bit_model();
    DnceConfig cfg;
    cfg.nu = 4;
    cfg.alpha = 0.5;
    cfg.steps = 5000;
    cfg.batch = 100;
    cfg.l2 = 0;
    cfg.average_tail = 0.5;
    cfg.seed = kLearnerSeed;
    SoftmaxTable q(space);
    dnce_train(dnce, data, q, cfg);
    out.push_back(check_le("dnce |zeta - log Z|", std::abs(dnce.params().block("zeta")[0] - log_z), 0.05, "nu=4, alpha=0.5"));
    out.push_back(check_le("dnce parameter error (l-inf)", linf_diff(dnce.weights(), truth_params), 0.05));
  }
  {
    LogLinearModel m(1, [](std::span<const int> x, SparseFeatures& f) { f.push_back({0, double(x[0])}); });
    std::vector<Config> bern;
    for (int i = 0; i < 100; ++i) bern.push_back({i < 70 ? 1 : 0});
    const auto bspace = DiscreteSpace::binary(1);
    EnumeratedConditionals fc(m, bspace);
    SmlConfig cfg;
    cfg.steps = 20000;
    cfg.l2 = 0;
    cfg.average_tail = 0.5;
    cfg.seed = seed + 2;
    sml_train(m, bern, [&](DiscreteChain& c) { gibbs_sweep(fc, c); }, cfg);
    out.push_back(check_le("sml bernoulli |theta - logit(0.7)|", std::abs(m.params()[0] - std::log(0.7 / 0.3)), 0.02, "logit(0.7) = 0.8473"));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<Check> criterion_appendix_invariants(std::uint64_t seed) {
  std::vector<Check> out;
  {
    auto m = three_bit_model();
    const auto space = DiscreteSpace::binary(3);
    const std::vector<double> counts = {3, 1, 2, 5, 1, 2, 4, 6};
    std::vector<double> emp(5, 0.0);
    double n = 0;
    space.for_each([&](std::span<const int> x) {
      const double c = counts[space.encode(x)];
      for (auto [k, v] : m.features(x)) emp[k] += c * v;
      n += c;
    });
    for (auto& e : emp) e /= n;
    for (int it = 0; it < 5000; ++it) {
      const auto model = enumerate_grad_log_z(m, space);
      for (std::size_t k = 0; k < 5; ++k) m.weights()[k] += 2.0 * (emp[k] - model[k]);
    }
    out.push_back(check_le("maxent moment matching", linf_diff(enumerate_grad_log_z(m, space), emp), 1e-6, "max |E_model f - E_data f|"));
  }
  {
    Worst w;
    Rng rng(seed, 11);
    for (int trial = 0; trial < 5; ++trial) {
      Rbm rbm(5, 4);
      rbm.randomize(rng, 1.0);
      RbmLatent latent(rbm);
      w.add(fisher_equality_check(latent, random_ids(rng, 2, 5)));
    }
    out.push_back(check_lt("fisher identity, rbm", w.value, 1e-9, "max |grad log p(v) - E_h|v grad log p(v,h)|"));
  }
  {
    Worst w;
    Rng rng(seed, 12);
    for (int trial = 0; trial < 5; ++trial) {
      const CtcPathModel model(random_matrix(rng, 5, 3));
      w.add(fisher_equality_check(model, random_ids(rng, 2, 1 + rng.uniform_int(2))));
    }
    out.push_back(check_lt("fisher identity, ctc", w.value, 1e-9, "latent frame paths enumerated"));
  }
  return out;
}

}  // namespace ebm::harness
