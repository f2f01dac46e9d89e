// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ebm/error.hpp"
#include "ebm/numeric.hpp"
#include "ebm/oracle.hpp"
#include "ebm/samplers.hpp"

using namespace ebm;

namespace {

// U given by a lookup table over a single coordinate.
class TableModel : public EnergyModel {
 public:
  explicit TableModel(std::vector<double> u) { params_.add_block("u", u.size()), params_.assign(u); }
  double potential(std::span<const int> x) const override { return params_[x[0]]; }
  void add_potential_grad(std::span<const int> x, double s, std::span<double> g) const override {
    g[x[0]] += s;
  }
};

// Normalized version of a TableModel, usable as a proposal.
class TableDistribution : public DiscreteDistribution {
 public:
  explicit TableDistribution(std::vector<double> logp) : logp_(std::move(logp)) {}
  Config sample(Rng& rng) const override { return {int(rng.categorical_log(logp_))}; }
  double log_prob(std::span<const int> x) const override { return logp_[x[0]]; }

 private:
  std::vector<double> logp_;
};

// Pairwise model over n variables with `card` values each.
class PottsChain : public EnergyModel {
 public:
  PottsChain(int n, int card, Rng& r) : n_(n), card_(card) {
    params_.add_block("field", n * card);
    params_.add_block("pair", (n - 1) * card * card);
    for (auto& v : params_.values()) v = r.uniform(-1, 1);
  }
  double potential(std::span<const int> x) const override {
    double u = 0;
    for (int i = 0; i < n_; ++i) u += params_[i * card_ + x[i]];
    for (int i = 0; i + 1 < n_; ++i) u += params_[n_ * card_ + (i * card_ + x[i]) * card_ + x[i + 1]];
    return u;
  }
  void add_potential_grad(std::span<const int> x, double s, std::span<double> g) const override {
    for (int i = 0; i < n_; ++i) g[i * card_ + x[i]] += s;
    for (int i = 0; i + 1 < n_; ++i) g[n_ * card_ + (i * card_ + x[i]) * card_ + x[i + 1]] += s;
  }

 private:
  int n_, card_;
};

class ExactConditionalProposal : public CoordinateProposal {
 public:
  explicit ExactConditionalProposal(const FullConditionals& fc) : fc_(fc) {}
  int sample(std::span<const int> x, std::size_t site, Rng& rng) const override {
    auto w = weights(x, site);
    return fc_.site_values(site)[rng.categorical_log(w)];
  }
  double log_density(int value, std::span<const int> x, std::size_t site) const override {
    auto w = weights(x, site);
    const auto& vals = fc_.site_values(site);
    const auto k = std::find(vals.begin(), vals.end(), value) - vals.begin();
    return w[k] - log_sum_exp(w);
  }

 private:
  std::vector<double> weights(std::span<const int> x, std::size_t site) const {
    std::vector<double> w(fc_.site_values(site).size());
    fc_.conditional_log_weights(x, site, w);
    return w;
  }
  const FullConditionals& fc_;
};

class Gaussian1D : public ContinuousEnergyModel {
 public:
  std::size_t dim() const override { return 1; }
  double potential(std::span<const double> x) const override { return -0.5 * x[0] * x[0]; }
  void grad_x(std::span<const double> x, std::span<double> out) const override { out[0] = -x[0]; }
};

class Flat : public ContinuousEnergyModel {
 public:
  std::size_t dim() const override { return 2; }
  double potential(std::span<const double>) const override { return 0.0; }
  void grad_x(std::span<const double>, std::span<double> out) const override {
    std::fill(out.begin(), out.end(), 0.0);
  }
};

const std::vector<double> kThreeState = {0.2, -0.5, 1.1};

}  // namespace

TEST_CASE("mh_step with the exact target as independent proposal always accepts") {
  TableModel target(kThreeState);
  TableDistribution q(log_softmax(kThreeState));
  IndependentProposal prop(q);
  DiscreteChain chain{{0}, 0, Rng(1), {}};
  for (int t = 0; t < 2000; ++t) {
    const Config y = prop.sample(chain.x, chain.rng);
    CHECK(mh_log_acceptance(target, prop, chain.x, y) > -1e-12);
    mh_step(target, prop, chain);
  }
  CHECK(chain.stats.accepted == chain.stats.proposed);
}

TEST_CASE("symmetric proposal accepts every uphill move") {
  TableModel target(kThreeState);
  SingleSiteProposal prop({3});
  Config lo = {1}, hi = {2};
  CHECK(mh_log_acceptance(target, prop, lo, hi) == 0.0);
  CHECK(mh_log_acceptance(target, prop, hi, lo) < 0.0);
}

TEST_CASE("invalid proposal endpoints are rejected") {
  TableModel target(kThreeState);
  SingleSiteProposal prop({3});
  Config a = {0};
  CHECK_THROWS_AS(mh_log_acceptance(target, prop, a, a), InvalidProposal);
}

TEST_CASE("mh detailed balance on a 3-state target") {
  TableModel target(kThreeState);
  SingleSiteProposal prop({3});
  const auto p = softmax(kThreeState);
  double k[3][3] = {};
  for (int a = 0; a < 3; ++a) {
    double stay = 1.0;
    for (int b = 0; b < 3; ++b) {
      if (a == b) continue;
      Config x = {a}, y = {b};
      k[a][b] = std::exp(prop.log_density(y, x) + mh_log_acceptance(target, prop, x, y));
      stay -= k[a][b];
    }
    k[a][a] = stay;
  }
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) CHECK(std::abs(p[a] * k[a][b] - p[b] * k[b][a]) < 1e-12);
}

TEST_CASE("mh random walk reaches the enumerated 3-state law") {
  TableModel target(kThreeState);
  SingleSiteProposal prop({3});
  DiscreteChain chain{{0}, 0, Rng(12), {}};
  auto samples = collect_samples([&](DiscreteChain& c) { mh_step(target, prop, c); }, chain, 1000000);
  auto space = DiscreteSpace::product({3});
  CHECK(tv_distance(empirical_distribution(space, samples), enumerate_probabilities(target, space)) < 0.01);
}

TEST_CASE("mis_step") {
  TableModel target(kThreeState);
  SUBCASE("proposal equals target") {
    TableDistribution q(log_softmax(kThreeState));
    IndependentProposal prop(q);
    DiscreteChain chain{{2}, 0, Rng(3), {}};
    for (int t = 0; t < 1000; ++t) mis_step(target, prop, chain);
    CHECK(chain.stats.accepted == chain.stats.proposed);
  }
  SUBCASE("uniform proposal reaches the target law") {
    TableDistribution q(std::vector<double>(3, -std::log(3.0)));
    IndependentProposal prop(q);
    DiscreteChain chain{{0}, 0, Rng(4), {}};
    auto samples = collect_samples([&](DiscreteChain& c) { mis_step(target, prop, c); }, chain, 300000);
    auto space = DiscreteSpace::product({3});
    CHECK(tv_distance(empirical_distribution(space, samples), enumerate_probabilities(target, space)) < 0.01);
  }
  SUBCASE("equal weights accept") {
    TableModel flat({0.0, 0.0, 0.0});
    TableDistribution q(std::vector<double>(3, -std::log(3.0)));
    IndependentProposal prop(q);
    DiscreteChain chain{{0}, 0, Rng(5), {}};
    for (int t = 0; t < 100; ++t) mis_step(flat, prop, chain);
    CHECK(chain.stats.accepted == 100);
  }
  SUBCASE("dependent proposal is refused") {
    SingleSiteProposal prop({3});
    DiscreteChain chain{{0}, 0, Rng(5), {}};
    CHECK_THROWS_AS(mis_step(target, prop, chain), InvalidArgument);
  }
}

TEST_CASE("gibbs sweep leaves the enumerated target invariant") {
  Rng r(21);
  PottsChain model(6, 3, r);  // 729 states
  auto space = DiscreteSpace::product(std::vector<int>(6, 3));
  EnumeratedConditionals fc(model, space);
  auto p = enumerate_probabilities(model, space);
  // Apply each site's kernel to p in sweep order.
  std::vector<double> v = p;
  for (std::size_t site = 0; site < 6; ++site) {
    std::vector<double> next(v.size(), 0.0), w(3);
    space.for_each([&](std::span<const int> x) {
      const double mass = v[space.encode(x)];
      fc.conditional_log_weights(x, site, w);
      const auto c = softmax(w);
      Config y(x.begin(), x.end());
      for (int k = 0; k < 3; ++k) {
        y[site] = k;
        next[space.encode(y)] += mass * c[k];
      }
    });
    v = next;
  }
  double worst = 0;
  for (std::size_t i = 0; i < p.size(); ++i) worst = std::max(worst, std::abs(v[i] - p[i]));
  CHECK(worst < 1e-10);
}

TEST_CASE("gibbs on a single variable samples the target exactly") {
  TableModel target(kThreeState);
  auto space = DiscreteSpace::product({3});
  EnumeratedConditionals fc(target, space);
  DiscreteChain chain{{0}, 0, Rng(8), {}};
  auto samples = collect_samples([&](DiscreteChain& c) { gibbs_sweep(fc, c); }, chain, 200000, 0.0);
  CHECK(tv_distance(empirical_distribution(space, samples), enumerate_probabilities(target, space)) < 0.005);
}

TEST_CASE("gibbs random scan also converges") {
  Rng r(22);
  PottsChain model(4, 2, r);
  auto space = DiscreteSpace::product(std::vector<int>(4, 2));
  EnumeratedConditionals fc(model, space);
  DiscreteChain chain{{0, 0, 0, 0}, 0, Rng(9), {}};
  auto samples = collect_samples([&](DiscreteChain& c) { gibbs_sweep(fc, c, ScanOrder::kRandom); }, chain, 200000);
  CHECK(tv_distance(empirical_distribution(space, samples), enumerate_probabilities(model, space)) < 0.01);
}

TEST_CASE("mh-within-gibbs with exact conditionals always accepts") {
  Rng r(23);
  PottsChain model(5, 3, r);
  auto space = DiscreteSpace::product(std::vector<int>(5, 3));
  EnumeratedConditionals fc(model, space);
  ExactConditionalProposal prop(fc);
  DiscreteChain chain{Config(5, 0), 0, Rng(10), {}};
  for (int t = 0; t < 200; ++t) {
    for (std::size_t s = 0; s < 5; ++s)
      for (int v = 0; v < 3; ++v)
        CHECK(mh_within_gibbs_log_acceptance(model, prop, chain.x, s, v) > -1e-12);
    mh_within_gibbs_sweep(model, prop, chain);
  }
  CHECK(chain.stats.accepted == chain.stats.proposed);
}

TEST_CASE("mala on a standard gaussian") {
  Gaussian1D g;
  ContinuousChain chain{{0.0}, 0, Rng(2024), {}};
  const int n = 100000;
  double s = 0, s2 = 0;
  for (int t = 0; t < n; ++t) {
    mala_step(g, chain, 0.5);
    s += chain.x[0];
    s2 += chain.x[0] * chain.x[0];
  }
  const double m = s / n;
  CHECK(std::abs(m) < 0.02);
  CHECK(std::abs(s2 / n - m * m - 1.0) < 0.05);
}

TEST_CASE("mala with zero gradient is pure diffusion") {
  Flat f;
  ContinuousChain chain{{0.0, 0.0}, 0, Rng(1), {}};
  for (int t = 0; t < 1000; ++t) mala_step(f, chain, 0.3);
  CHECK(chain.stats.accepted == chain.stats.proposed);
  CHECK_THROWS_AS(mala_step(f, chain, 0.0), InvalidArgument);
}

TEST_CASE("sgld") {
  SUBCASE("zero drift with a constant step is a random walk") {
    const double delta = 0.01;
    std::vector<double> z = {0.0};
    Rng rng(5);
    double prev = 0, s2 = 0;
    const int n = 200000;
    sgld_run([](std::span<const double>, Rng&, std::span<double> out) { out[0] = 0; }, z,
             SgldSchedule::fixed(delta), n, rng, [&](std::uint64_t, std::span<const double> x) {
               s2 += (x[0] - prev) * (x[0] - prev);
               prev = x[0];
             });
    CHECK(s2 / n == doctest::Approx(2 * delta).epsilon(0.02));
  }
  SUBCASE("small decaying steps approach the gaussian target") {
    // Final iterates of independent chains; the steps shrink to ~1e-3.
    Rng rng(6);
    double s = 0, s2 = 0;
    const int chains = 8000;
    for (int c = 0; c < chains; ++c) {
      std::vector<double> z = {2.0};
      sgld_run([](std::span<const double> x, Rng&, std::span<double> out) { out[0] = -x[0]; }, z,
               SgldSchedule::decay(0.1, 1.0, 0.6), 2000, rng);
      s += z[0];
      s2 += z[0] * z[0];
    }
    const double m = s / chains;
    CHECK(std::abs(m) < 0.05);
    CHECK(s2 / chains - m * m == doctest::Approx(1.0).epsilon(0.05));
  }
  SUBCASE("invalid schedules") {
    CHECK_THROWS_AS(SgldSchedule::decay(0.1, 1.0, 0.5), InvalidArgument);
    CHECK_THROWS_AS(SgldSchedule::decay(-0.1, 1.0, 0.7), InvalidArgument);
    CHECK_THROWS_AS(SgldSchedule::decay(0.1, 1.0, 1.5), InvalidArgument);
    CHECK_THROWS_AS(SgldSchedule::fixed(0.0), InvalidArgument);
  }
}

TEST_CASE("importance sampling") {
  TableModel target(kThreeState);
  TableDistribution uniform(std::vector<double>(3, -std::log(3.0)));
  SUBCASE("constant statistic is exactly one") {
    Rng rng(1);
    for (int run = 0; run < 20; ++run) {
      auto r = snis_estimate(target, uniform, [](std::span<const int>) { return 1.0; }, 1 + run, rng);
      CHECK(r.estimate == 1.0);
    }
  }
  SUBCASE("normalized target as proposal gives a plain average") {
    TableDistribution q(log_softmax(kThreeState));
    Rng a(2), b(2);
    auto r = snis_estimate(target, q, [](std::span<const int> x) { return double(x[0]); }, 500, a);
    double plain = 0;
    for (int j = 0; j < 500; ++j) plain += q.sample(b)[0];
    CHECK(r.estimate == doctest::Approx(plain / 500).epsilon(1e-12));
    CHECK(r.ess == doctest::Approx(500).epsilon(1e-9));
  }
  SUBCASE("z ratio with target equal to proposal is exactly one") {
    TableModel same(std::vector<double>(3, -std::log(3.0)));
    Rng rng(3);
    for (int run = 0; run < 10; ++run) CHECK(is_z_ratio(same, uniform, 17, rng) == 1.0);
  }
  SUBCASE("normalized proposal estimates Z_p") {
    Rng rng(4);
    double s = 0;
    for (int run = 0; run < 1000; ++run) s += is_z_ratio(target, uniform, 20, rng);
    double z = 0;
    for (double u : kThreeState) z += std::exp(u);
    CHECK(s / 1000 == doctest::Approx(z).epsilon(0.01));
  }
  SUBCASE("all-zero weights are an error") {
    TableModel dead({kNegInf, kNegInf, kNegInf});
    Rng rng(5);
    CHECK_THROWS_AS(snis_estimate(dead, uniform, [](std::span<const int>) { return 1.0; }, 10, rng),
                    NumericalError);
  }
}

TEST_CASE("sample dump format") {
  std::ostringstream os;
  write_sample_dump(os, "ising-3x3", 42, std::vector<Config>{{1, -1}, {1, 1}});
  CHECK(os.str() == "# model=ising-3x3 seed=42\n1 -1\n1 1\n");
}
