// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ebm/error.hpp"
#include "ebm/learners.hpp"
#include "ebm/models/densities.hpp"
#include "ebm/models/log_linear.hpp"
#include "ebm/models/rbm.hpp"
#include "ebm/numeric.hpp"
#include "ebm/oracle.hpp"

using namespace ebm;

namespace {

// Singletons plus two adjacent pairs on three bits.
LogLinearModel three_bit_model() {
  return LogLinearModel(5, [](std::span<const int> x, SparseFeatures& f) {
    for (int i = 0; i < 3; ++i) f.push_back({std::size_t(i), double(x[i])});
    f.push_back({3, double(x[0] * x[1])});
    f.push_back({4, double(x[1] * x[2])});
  });
}

const std::vector<double> kTruth = {0.5, -0.3, 0.8, -0.6, 0.4};

class UniformNoise : public DiscreteDistribution {
 public:
  explicit UniformNoise(DiscreteSpace s) : s_(std::move(s)) {}
  Config sample(Rng& rng) const override { return s_.decode(rng.uniform_int(s_.size())); }
  double log_prob(std::span<const int>) const override { return -std::log(double(s_.size())); }

 private:
  DiscreteSpace s_;
};

// Puts no mass on x[0] = 1.
class HalfNoise : public DiscreteDistribution {
 public:
  Config sample(Rng& rng) const override { return {0, int(rng.uniform_int(2)), int(rng.uniform_int(2))}; }
  double log_prob(std::span<const int> x) const override { return x[0] ? kNegInf : -std::log(4.0); }
};

std::vector<Config> draw(const EnergyModel& m, const DiscreteSpace& space, std::size_t n,
                         std::uint64_t seed) {
  const auto p = enumerate_probabilities(m, space);
  Rng rng(seed);
  std::vector<Config> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(space.decode(rng.categorical(p)));
  return out;
}

double kl(std::span<const double> p, std::span<const double> q) {
  double s = 0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0) s += p[i] * std::log(p[i] / q[i]);
  return s;
}

std::vector<Config> bimodal_data() {
  std::vector<Config> d;
  for (int i = 0; i < 13; ++i) d.push_back({1, 1, 1, 1}), d.push_back({0, 0, 0, 0});
  d.push_back({1, 0, 1, 0});
  d.push_back({0, 1, 1, 0});
  d.push_back({1, 1, 0, 1});
  d.push_back({0, 0, 1, 0});
  return d;
}

std::vector<Config> rbm_data() {
  Rng rng(99);
  Rbm gen(4, 3);
  gen.randomize(rng, 2.0);
  const auto space = DiscreteSpace::binary(4);
  const auto p = enumerate_probabilities(gen, space);
  std::vector<Config> d;
  for (int i = 0; i < 30; ++i) d.push_back(space.decode(rng.categorical(p)));
  return d;
}

std::vector<double> moment_gap(const Rbm& rbm, const std::vector<Config>& data) {
  auto gap = enumerate_grad_log_z(rbm, DiscreteSpace::binary(rbm.visible()));
  for (auto& g : gap) g = -g;
  for (const auto& x : data) rbm.add_potential_grad(x, 1.0 / double(data.size()), gap);
  return gap;
}

double linf(std::span<const double> v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("sa schedule") {
  SaSchedule s(0.5, 10, 100);
  CHECK(s.gamma(1) == 0.5);
  CHECK(s.gamma(99) == 0.5);
  CHECK(s.gamma(100) == 0.5);
  CHECK(s.gamma(110) == doctest::Approx(0.25));
  double prev = s.gamma(1);
  for (std::uint64_t t = 2; t < 5000; ++t) {
    CHECK(s.gamma(t) <= prev);
    CHECK(s.gamma(t) > 0);
    prev = s.gamma(t);
  }
  const auto d = SaSchedule::default_for(1000);
  CHECK(d.gamma(299) == 0.1);
  CHECK(d.gamma(1000) < 0.1);
  CHECK_THROWS_AS(SaSchedule(0.1, 0.0, 1), InvalidArgument);
  CHECK_THROWS_AS(SaSchedule(-0.1, 1.0, 1), InvalidArgument);
}

TEST_CASE("sa_run") {
  SUBCASE("robbins-monro toy") {
    const double target = 1.7;
    SaConfig cfg;
    cfg.steps = 100000;
    cfg.schedule = SaSchedule(1.0, 1.0, 0.0);
    cfg.seed = 4;
    const auto lambda = sa_run({0.0}, [&](std::span<const double> l, Rng& rng, std::span<double> f) {
      f[0] = -l[0] + target + rng.normal();
    }, cfg);
    CHECK(std::abs(lambda[0] - target) < 0.05);
  }
  SUBCASE("zero gain leaves parameters alone") {
    SaConfig cfg;
    cfg.steps = 100;
    cfg.schedule = SaSchedule::constant(0.0);
    const auto lambda = sa_run({0.3, -2.0}, [](std::span<const double>, Rng& rng, std::span<double> f) {
      f[0] = rng.normal(), f[1] = 1.0;
    }, cfg);
    CHECK(lambda == std::vector<double>{0.3, -2.0});
  }
  SUBCASE("minibatch sgd on a quadratic") {
    // f(l) = mean_i |l - c_i|^2 / 2 over 200 points; optimum at the mean.
    Rng data_rng(1);
    std::vector<std::array<double, 2>> c(200);
    std::array<double, 2> mean{0, 0};
    for (auto& p : c) {
      p = {0.25 * data_rng.normal() + 1, 0.25 * data_rng.normal() - 2};
      mean[0] += p[0] / 200, mean[1] += p[1] / 200;
    }
    SaConfig cfg;
    cfg.steps = 50000;
    cfg.moves = 50;
    cfg.schedule = SaSchedule(0.5, 100, 1000);
    cfg.average_tail = 0.5;
    const auto l = sa_run({0.0, 0.0}, [&](std::span<const double> l, Rng& rng, std::span<double> f) {
      const auto& p = c[rng.uniform_int(c.size())];
      f[0] = p[0] - l[0], f[1] = p[1] - l[1];
    }, cfg);
    CHECK(std::abs(l[0] - mean[0]) < 1e-3);
    CHECK(std::abs(l[1] - mean[1]) < 1e-3);
  }
  SUBCASE("non-finite update names the step") {
    SaConfig cfg;
    cfg.steps = 10;
    cfg.schedule = SaSchedule::constant(0.1);
    int calls = 0;
    try {
      sa_run({0.0}, [&](std::span<const double>, Rng&, std::span<double> f) {
        f[0] = ++calls == 3 ? std::nan("") : 1.0;
      }, cfg);
      FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
      CHECK(std::string(e.what()).find("step 3") != std::string::npos);
    }
  }
}

TEST_CASE("sml on the bernoulli toy") {
  LogLinearModel m(1, [](std::span<const int> x, SparseFeatures& f) { f.push_back({0, double(x[0])}); });
  std::vector<Config> data;
  for (int i = 0; i < 100; ++i) data.push_back({i < 70 ? 1 : 0});
  const auto space = DiscreteSpace::binary(1);
  EnumeratedConditionals fc(m, space);
  const DiscreteKernel gibbs = [&](DiscreteChain& c) { gibbs_sweep(fc, c); };

  SmlConfig cfg;
  cfg.steps = 20000;
  cfg.l2 = 0;
  cfg.average_tail = 0.5;
  cfg.seed = 3;
  cfg.trace_every = 1000;
  const auto trace = sml_train(m, data, gibbs, cfg);
  CHECK(std::abs(m.params()[0] - std::log(0.7 / 0.3)) < 0.02);
  CHECK(trace.rows().size() == 20);

  LogLinearModel frozen(1, [](std::span<const int> x, SparseFeatures& f) { f.push_back({0, double(x[0])}); });
  EnumeratedConditionals ffc(frozen, space);
  cfg.schedule = SaSchedule::constant(0.0);
  sml_train(frozen, data, [&](DiscreteChain& c) { gibbs_sweep(ffc, c); }, cfg);
  CHECK(frozen.params()[0] == 0.0);
}

TEST_CASE("sml update direction approaches the exact gradient") {
  auto m = three_bit_model();
  m.params().assign(kTruth);
  const auto space = DiscreteSpace::binary(3);
  const std::vector<Config> data = {{1, 0, 1}, {0, 0, 1}, {1, 1, 1}, {0, 1, 0}};
  auto exact = enumerate_grad_log_z(m, space);
  for (auto& g : exact) g = -g;
  for (const auto& x : data) m.add_potential_grad(x, 0.25, exact);
  auto mean_error = [&](std::size_t k) {
    double e = 0;
    for (std::uint64_t rep = 0; rep < 200; ++rep) {
      const auto est = sml_gradient_estimate(m, data, draw(m, space, k, 1000 * k + rep));
      double s = 0;
      for (std::size_t i = 0; i < est.size(); ++i) s += (est[i] - exact[i]) * (est[i] - exact[i]);
      e += std::sqrt(s) / 200;
    }
    return e;
  };
  const double ratio = mean_error(100) / mean_error(6400);
  CHECK(ratio > 6.0);
  CHECK(ratio < 10.5);
}

TEST_CASE("sml reaches the exact optimum on a small rbm") {
  const auto data = rbm_data();
  const auto space = DiscreteSpace::binary(4);
  Rbm exact(4, 3);
  Rng init(5);
  exact.randomize(init, 0.1);
  Rbm sampled = exact;
  const double best = exact_mle_train(exact, space, data, 20000, 0.5, 1e-3);

  SmlConfig cfg;
  cfg.steps = 40000;
  cfg.average_tail = 0.5;
  cfg.seed = 1;
  sml_train(sampled, data, [&](DiscreteChain& c) {
    std::vector<int> h(3);
    sampled.block_gibbs(c.x, h, c.rng);
  }, cfg);
  CHECK(std::abs(exact_mean_loglik(sampled, space, data) - best) < 1e-2);
}

TEST_CASE("cd and pcd") {
  const auto space = DiscreteSpace::binary(4);
  SUBCASE("pcd-1 matches moments") {
    const auto data = rbm_data();
    Rbm rbm(4, 3);
    Rng init(5);
    rbm.randomize(init, 0.1);
    CdConfig cfg;
    cfg.steps = 40000;
    cfg.average_tail = 0.5;
    cfg.seed = 2;
    cd_pcd_train(rbm, data, cfg);
    CHECK(linf(moment_gap(rbm, data)) < 1e-2);
  }
  SUBCASE("cd-1 fits worse than pcd-1") {
    const auto data = bimodal_data();
    int wins = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      Rbm pcd(4, 3);
      Rng init(5);
      pcd.randomize(init, 0.1);
      Rbm cd = pcd;
      CdConfig cfg;
      cfg.steps = 20000;
      cfg.average_tail = 0.5;
      cfg.seed = seed;
      cd_pcd_train(pcd, data, cfg);
      cfg.mode = CdMode::kCd;
      cd_pcd_train(cd, data, cfg);
      // KL(p_emp || p) differs from -loglik by the data entropy only.
      wins += exact_mean_loglik(pcd, space, data) > exact_mean_loglik(cd, space, data);
    }
    CHECK(wins >= 8);
  }
  SUBCASE("k = 0 keeps only the data term") {
    const std::vector<Config> data(5, Config{1, 0, 1, 1});
    Rbm rbm(4, 3);
    CdConfig cfg;
    cfg.steps = 1;
    cfg.k = 0;
    cfg.l2 = 0;
    cfg.schedule = SaSchedule::constant(0.1);
    cd_pcd_train(rbm, data, cfg);
    Rbm zero(4, 3);
    std::vector<double> expect(zero.num_params(), 0.0);
    zero.add_potential_grad(data[0], 0.1, expect);
    CHECK(max_relative_error(rbm.params().values(), expect) < 1e-15);
  }
}

TEST_CASE("nce posterior and objective") {
  CHECK(nce_posterior(std::log(0.2), std::log(0.1), 2.0) == doctest::Approx(0.5));
  CHECK(nce_posterior(std::log(0.3), std::log(0.1), 1.0) == doctest::Approx(0.75));

  const auto space = DiscreteSpace::binary(3);
  UniformNoise noise(space);
  SUBCASE("model equal to noise") {
    auto m = three_bit_model();
    m.enable_zeta(1, std::log(8.0));
    for (double nu : {1.0, 4.0, 10.0})
      space.for_each([&](std::span<const int> x) {
        CHECK(nce_posterior(m.log_model(x), noise.log_prob(x), nu) ==
              doctest::Approx(1 / (1 + nu)).epsilon(1e-14));
      });
    const std::vector<double> uniform(8, 1.0 / 8);
    const auto obj = nce_objective_exact(m, space, uniform, noise, 4.0);
    CHECK(linf(obj.gradient) < 1e-15);
  }
  SUBCASE("gradient matches finite differences") {
    auto truth = three_bit_model();
    truth.params().assign(kTruth);
    const auto p = enumerate_probabilities(truth, space);
    Rng rng(6);
    for (int trial = 0; trial < 20; ++trial) {
      auto m = three_bit_model();
      m.enable_zeta(1);
      for (auto& v : m.params().values()) v = rng.uniform(-1, 1);
      const auto obj = nce_objective_exact(m, space, p, noise, 3.0);
      const std::vector<double> theta(m.params().values().begin(), m.params().values().end());
      const auto fd = finite_diff_grad([&](std::span<const double> t) {
        auto probe = three_bit_model();
        probe.enable_zeta(1);
        probe.params().assign(t);
        return nce_objective_exact(probe, space, p, noise, 3.0).value;
      }, theta);
      CHECK(max_relative_error(obj.gradient, fd) < 1e-6);
    }
  }
  SUBCASE("zero noise density at data is rejected") {
    auto m = three_bit_model();
    m.enable_zeta(1);
    HalfNoise half;
    const std::vector<Config> pos = {{1, 0, 0}};
    const std::vector<double> w = {1.0};
    CHECK_THROWS_AS(nce_objective(m, half, 1.0, pos, w, {}, {}), ConsistencyViolation);
  }
}

TEST_CASE("nce objective peaks at the truth") {
  const auto space = DiscreteSpace::binary(3);
  UniformNoise noise(space);
  auto m = three_bit_model();
  m.params().assign(kTruth);
  const double log_z = enumerate_log_z(m, space);
  const auto p = enumerate_probabilities(m, space);
  m.enable_zeta(1, log_z);
  const double best = nce_objective_exact(m, space, p, noise, 5.0).value;
  const std::vector<double> theta(m.params().values().begin(), m.params().values().end());
  Rng rng(10);
  for (int d = 0; d < 50; ++d) {
    std::vector<double> dir(theta.size());
    for (auto& v : dir) v = rng.normal();
    for (double eps : {1e-3, 0.05, 0.5}) {
      auto probe = theta;
      for (std::size_t i = 0; i < probe.size(); ++i) probe[i] += eps * dir[i];
      m.params().assign(probe);
      CHECK(nce_objective_exact(m, space, p, noise, 5.0).value <= best + 1e-6);
    }
  }
}

TEST_CASE("nce and dnce recover a log-linear model") {
  const auto space = DiscreteSpace::binary(3);
  auto truth = three_bit_model();
  truth.params().assign(kTruth);
  const double log_z = enumerate_log_z(truth, space);
  const auto data = draw(truth, space, 50000, 2024);

  auto nce = three_bit_model();
  NceConfig cfg;
  cfg.nu = 10;
  cfg.steps = 5000;
  cfg.batch = 100;
  cfg.l2 = 0;
  cfg.average_tail = 0.5;
  cfg.seed = 1;
  cfg.trace_every = 500;
  UniformNoise noise(space);
  const auto trace = nce_train(nce, data, noise, cfg);
  CHECK(std::abs(nce.params().block("zeta")[0] - log_z) < 0.05);
  std::vector<double> err(5);
  for (int i = 0; i < 5; ++i) err[i] = nce.params()[i] - kTruth[i];
  CHECK(linf(err) < 0.05);
  REQUIRE(trace.rows().size() == 10);
  CHECK(trace.rows()[0].has_zeta);

  auto dnce = three_bit_model();
  DnceConfig dcfg;
  dcfg.steps = 5000;
  dcfg.batch = 100;
  dcfg.l2 = 0;
  dcfg.average_tail = 0.5;
  dcfg.seed = 1;
  SoftmaxTable q(space);
  dnce_train(dnce, data, q, dcfg);
  CHECK(std::abs(dnce.params().block("zeta")[0] - log_z) < 0.05);
  for (int i = 0; i < 5; ++i) err[i] = dnce.params()[i] - kTruth[i];
  CHECK(linf(err) < 0.05);

  // Consistency: model, noise and truth coincide.
  const auto p_true = enumerate_probabilities(truth, space);
  CHECK(kl(p_true, enumerate_probabilities(dnce, space)) < 1e-3);
  CHECK(kl(p_true, q.probabilities()) < 1e-3);
}

TEST_CASE("dnce limits") {
  const auto space = DiscreteSpace::binary(3);
  auto truth = three_bit_model();
  truth.params().assign(kTruth);
  const auto p = enumerate_probabilities(truth, space);
  SoftmaxTable q(space);
  Rng rng(3);
  for (auto& v : q.logits()) v = rng.uniform(-1, 1);
  q.mle_step({}, 0.0);

  auto m = three_bit_model();
  m.enable_zeta(1, 1.0);
  for (auto& v : m.params().values()) v = rng.uniform(-1, 1);
  const auto nce = nce_objective_exact(m, space, p, q, 4.0);
  const auto dnce = dnce_objective_exact(m, space, p, q, 4.0, 0.999);
  std::vector<double> diff(nce.gradient.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = nce.gradient[i] - dnce.gradient[i];
  CHECK(linf(diff) < 1e-3);
  CHECK(linf(diff) > 0);

  // The noise update alone is maximum likelihood of the table.
  const auto data = draw(truth, space, 20000, 8);
  for (int it = 0; it < 3000; ++it) q.mle_step(data, 2.0);
  const auto emp = empirical_distribution(space, data);
  CHECK(max_relative_error(q.probabilities(), emp) < 1e-6);

  CHECK_THROWS_AS(dnce_objective(m, q, 4.0, 1.0, data, {}, {}), InvalidArgument);
}

namespace {

// U(x, y) = w[x][y] for x in {0,1,2}, y in {0..3}.
class TableConditional : public ConditionalEnergyModel {
 public:
  TableConditional() { params_.add_block("w", 12); }
  double potential(std::span<const int> x, std::span<const int> y) const override {
    return params_[x[0] * 4 + y[0]];
  }
  void add_potential_grad(std::span<const int> x, std::span<const int> y, double s,
                          std::span<double> g) const override {
    g[x[0] * 4 + y[0]] += s;
  }
  double log_z(int x) const {
    LogSumExp acc;
    for (int y = 0; y < 4; ++y) acc.add(params_[x * 4 + y]);
    return acc.value();
  }
};

class UniformLabels : public ConditionalNoise {
 public:
  Config sample(std::span<const int>, Rng& rng) const override { return {int(rng.uniform_int(4))}; }
  double log_prob(std::span<const int>, std::span<const int>) const override { return -std::log(4.0); }
};

}  // namespace

TEST_CASE("conditional nce") {
  UniformLabels noise;
  TableConditional same;
  for (auto& v : same.params().values()) v = -std::log(4.0);
  const auto obj = conditional_nce_objective(same, noise, 1.0, {{1}, {2}}, {{3}});
  CHECK(obj.value == doctest::Approx(2 * std::log(0.5)).epsilon(1e-14));

  // Pairs from a conditional with arbitrary per-x offsets in its unnormalized form.
  TableConditional truth;
  Rng rng(12);
  for (auto& v : truth.params().values()) v = rng.uniform(-1.5, 1.5);
  std::vector<PairedExample> pairs;
  for (int i = 0; i < 30000; ++i) {
    const int x = int(rng.uniform_int(3));
    std::vector<double> lw(4);
    for (int y = 0; y < 4; ++y) lw[y] = truth.potential(std::vector<int>{x}, std::vector<int>{y});
    pairs.push_back({{x}, {int(rng.categorical_log(lw))}});
  }
  TableConditional model;
  NceConfig cfg;
  cfg.nu = 5;
  cfg.steps = 6000;
  cfg.batch = 20;
  cfg.l2 = 0;
  cfg.average_tail = 0.5;
  cfg.seed = 4;
  conditional_nce_train(model, pairs, noise, cfg);
  for (int x = 0; x < 3; ++x) CHECK(std::abs(model.log_z(x)) < 0.1);
}

TEST_CASE("latent gaussian generator") {
  LatentGaussianGenerator gen(1, 1, {3}, 0.4);
  Rng rng(2);
  gen.init(rng, 1.0);
  const std::vector<double> h = {0.3}, x = {-0.2};
  const auto gx = gen.grad_x_log_joint(h, x);
  const auto gh = gen.grad_h_log_joint(h, x);
  CHECK(gx[0] == doctest::Approx(finite_diff_grad([&](std::span<const double> z) {
                                   return gen.log_joint(h, z);
                                 }, x)[0]).epsilon(1e-7));
  CHECK(gh[0] == doctest::Approx(finite_diff_grad([&](std::span<const double> z) {
                                   return gen.log_joint(z, x);
                                 }, h)[0]).epsilon(1e-7));
  std::vector<double> gp(gen.params().size(), 0.0);
  gen.add_param_grad(h, x, 1.0, gp);
  const std::vector<double> phi(gen.params().values().begin(), gen.params().values().end());
  const auto fd = finite_diff_grad([&](std::span<const double> t) {
    LatentGaussianGenerator probe = gen;
    probe.params().assign(t);
    return probe.log_joint(h, x);
  }, phi);
  CHECK(max_relative_error(gp, fd) < 1e-7);

  SUBCASE("marginal score is the posterior mean of the joint score") {
    // 1-D quadrature over h on a fine grid.
    auto log_marginal = [&](double xv) {
      LogSumExp acc;
      for (int i = -4000; i <= 4000; ++i) {
        const std::vector<double> hh = {i * 0.002}, xx = {xv};
        acc.add(gen.log_joint(hh, xx));
      }
      return acc.value() + std::log(0.002);
    };
    for (double xv : {-1.0, 0.1, 0.8}) {
      const double fd_score = (log_marginal(xv + 1e-4) - log_marginal(xv - 1e-4)) / 2e-4;
      LogSumExp norm;
      std::vector<double> lw, score;
      for (int i = -4000; i <= 4000; ++i) {
        const std::vector<double> hh = {i * 0.002}, xx = {xv};
        lw.push_back(gen.log_joint(hh, xx));
        score.push_back(gen.grad_x_log_joint(hh, xx)[0]);
        norm.add(lw.back());
      }
      double posterior_mean = 0;
      for (std::size_t i = 0; i < lw.size(); ++i) posterior_mean += std::exp(lw[i] - norm.value()) * score[i];
      CHECK(posterior_mean == doctest::Approx(fd_score).epsilon(1e-6));
    }
  }
  SUBCASE("no revision returns the ancestral sample") {
    QuadraticEnergy ebm(1);
    Rng a(9), b(9);
    const auto s = revise_sample(ebm, gen, 0, SgldSchedule::fixed(0.1), a);
    std::vector<double> hh;
    const auto xx = gen.sample(b, hh);
    CHECK(s.x == xx);
    CHECK(s.h == hh);
  }
}

TEST_CASE("inclusive nrf fits a gaussian") {
  Gaussian2D g;
  g.mean[0] = 1.0, g.mean[1] = -0.5;
  g.cov[0][1] = g.cov[1][0] = 0.5;
  GaussianMixture2D truth({1.0}, {g});
  Rng rng(1);
  std::vector<std::vector<double>> data;
  for (int i = 0; i < 5000; ++i) data.push_back(truth.sample(rng));

  QuadraticEnergy ebm(2);
  ebm.set_gaussian(std::vector<double>{0, 0}, {{1, 0}, {0, 1}});
  LatentGaussianGenerator gen(2, 2, {}, 0.6);
  Rng init(2);
  gen.init(init, 0.5);
  InclusiveNrfConfig cfg;
  cfg.steps = 3000;
  cfg.batch = 10;
  cfg.l2 = 0;
  cfg.average_tail = 0.5;
  cfg.schedule = SaSchedule::default_for(cfg.steps, 0.05);
  cfg.generator_lr_scale = 1.0;
  cfg.revision_steps = 50;
  cfg.revision = SgldSchedule::fixed(0.05);
  cfg.inner_steps = 10;
  inclusive_nrf_train(ebm, gen, data, cfg);

  // Relative Frobenius error against the true covariance.
  const double c[2][2] = {{1.0, 0.5}, {0.5, 1.0}};
  auto rel_err = [&](const std::vector<std::vector<double>>& m) {
    double num = 0, den = 0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) num += (m[i][j] - c[i][j]) * (m[i][j] - c[i][j]), den += c[i][j] * c[i][j];
    return std::sqrt(num / den);
  };
  CHECK(rel_err(ebm.covariance()) < 0.10);

  Rng sr(7);
  std::vector<std::vector<double>> s;
  std::vector<double> h;
  for (int i = 0; i < 20000; ++i) s.push_back(gen.sample(sr, h));
  double m0 = 0, m1 = 0;
  for (const auto& x : s) m0 += x[0] / s.size(), m1 += x[1] / s.size();
  std::vector<std::vector<double>> cov(2, std::vector<double>(2, 0.0));
  for (const auto& x : s) {
    const double d[2] = {x[0] - m0, x[1] - m1};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) cov[i][j] += d[i] * d[j] / s.size();
  }
  CHECK(rel_err(cov) < 0.15);
}

TEST_CASE("training trace csv and determinism") {
  const auto space = DiscreteSpace::binary(3);
  auto truth = three_bit_model();
  truth.params().assign(kTruth);
  const auto data = draw(truth, space, 2000, 1);
  UniformNoise noise(space);
  NceConfig cfg;
  cfg.steps = 200;
  cfg.trace_every = 100;
  auto a = three_bit_model(), b = three_bit_model();
  const auto ta = nce_train(a, data, noise, cfg);
  nce_train(b, data, noise, cfg);
  CHECK(a.params() == b.params());
  std::ostringstream csv;
  ta.write_csv(csv);
  const auto text = csv.str();
  CHECK(text.rfind("step,objective,gamma,acceptance,zeta\n100,", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}
