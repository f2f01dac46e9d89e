// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "ebm/discrete_space.hpp"
#include "ebm/error.hpp"
#include "ebm/numeric.hpp"
#include "ebm/oracle.hpp"
#include "ebm/rng.hpp"

using namespace ebm;

namespace {

// U = theta . f(x) with f = (x_0, x_1, ..., x_0 * x_1).
class PairModel : public EnergyModel {
 public:
  explicit PairModel(int n) : n_(n) { params_.add_block("w", n + 1); }
  double potential(std::span<const int> x) const override {
    double u = params_[n_] * x[0] * x[1];
    for (int i = 0; i < n_; ++i) u += params_[i] * x[i];
    return u;
  }
  void add_potential_grad(std::span<const int> x, double s, std::span<double> g) const override {
    for (int i = 0; i < n_; ++i) g[i] += s * x[i];
    g[n_] += s * x[0] * x[1];
  }

 private:
  int n_;
};

double ising3_potential(std::span<const int> x, double beta) {
  double u = 0;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      if (c + 1 < 3) u += x[r * 3 + c] * x[r * 3 + c + 1];
      if (r + 1 < 3) u += x[r * 3 + c] * x[(r + 1) * 3 + c];
    }
  return beta * u;
}

// Independent route: row-to-row transfer matrix on the free-boundary grid.
double ising3_transfer_log_z(double beta) {
  auto spin = [](int row, int i) { return ((row >> i) & 1) ? 1 : -1; };
  std::vector<double> w(8), v(8);
  for (int r = 0; r < 8; ++r)
    w[r] = std::exp(beta * (spin(r, 0) * spin(r, 1) + spin(r, 1) * spin(r, 2)));
  v = w;
  for (int step = 0; step < 2; ++step) {
    std::vector<double> nv(8, 0.0);
    for (int a = 0; a < 8; ++a)
      for (int b = 0; b < 8; ++b) {
        double c = 0;
        for (int i = 0; i < 3; ++i) c += spin(a, i) * spin(b, i);
        nv[b] += v[a] * std::exp(beta * c) * w[b];
      }
    v = nv;
  }
  return std::log(std::accumulate(v.begin(), v.end(), 0.0));
}

// A latent model with exactly one latent value: p(x, h) = p(x).
class SinglePathModel : public LatentVariableModel {
 public:
  std::size_t num_params() const override { return 2; }
  DiscreteSpace latent_space(std::span<const int>) const override { return DiscreteSpace::product({1}); }
  double log_joint(std::span<const int> x, std::span<const int>) const override {
    return theta[0] * x[0] + theta[1] * x[1] - std::log(3.0);
  }
  void add_log_joint_grad(std::span<const int> x, std::span<const int>, double s,
                          std::span<double> g) const override {
    g[0] += s * x[0];
    g[1] += s * x[1];
  }
  std::vector<double> log_marginal_grad(std::span<const int> x) const override {
    return {static_cast<double>(x[0]), static_cast<double>(x[1])};
  }
  double theta[2] = {0.3, -1.2};
};

}  // namespace

TEST_CASE("log-sum-exp is stable and streaming") {
  std::vector<double> v = {1000.0, 1000.0};
  CHECK(log_sum_exp(v) == doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-15));
  LogSumExp a, b, all;
  for (int i = 0; i < 50; ++i) {
    const double x = std::sin(i) * 30;
    (i < 20 ? a : b).add(x);
    all.add(x);
  }
  a.merge(b);
  CHECK(a.value() == doctest::Approx(all.value()).epsilon(1e-14));
  CHECK(LogSumExp().value() == kNegInf);
}

TEST_CASE("rng streams are reproducible and keyed") {
  Rng a(7, 1), b(7, 1), c(7, 2);
  for (int i = 0; i < 10; ++i) CHECK(a.next() == b.next());
  CHECK(Rng(7, 1).next() != c.next());
  CHECK(Rng::keyed(1, 2, 3).next() == Rng::keyed(1, 2, 3).next());
  CHECK(Rng::keyed(1, 2, 3).next() != Rng::keyed(1, 3, 2).next());
  Rng r(3);
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s += z;
    s2 += z * z;
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(std::abs(s2 / n - 1.0) < 0.02);
  std::vector<int> counts(3, 0);
  std::vector<double> w = {1, 2, 7};
  for (int i = 0; i < 100000; ++i) ++counts[r.categorical(w)];
  CHECK(counts[2] / 100000.0 == doctest::Approx(0.7).epsilon(0.02));
}

TEST_CASE("discrete spaces visit every configuration once") {
  auto s = DiscreteSpace::product({2, 3, 2});
  CHECK(s.size() == 12);
  std::set<Config> seen;
  std::uint64_t i = 0;
  s.for_each([&](std::span<const int> x) {
    CHECK(s.encode(x) == i++);
    seen.insert(Config(x.begin(), x.end()));
  });
  CHECK(seen.size() == 12);

  auto seq = DiscreteSpace::sequences(4, 1, 3);
  CHECK(seq.size() == 84);
  std::set<Config> seqs;
  i = 0;
  seq.for_each([&](std::span<const int> x) {
    CHECK(seq.encode(x) == i);
    CHECK(seq.decode(i) == Config(x.begin(), x.end()));
    ++i;
    seqs.insert(Config(x.begin(), x.end()));
  });
  CHECK(seqs.size() == 84);

  auto spins = DiscreteSpace::spins(2);
  std::vector<Config> all;
  spins.for_each([&](std::span<const int> x) { all.emplace_back(x.begin(), x.end()); });
  CHECK(all == std::vector<Config>{{-1, -1}, {-1, 1}, {1, -1}, {1, 1}});
}

TEST_CASE("enumerate_log_z") {
  SUBCASE("uniform model on 8 states") {
    CHECK(enumerate_log_z([](std::span<const int>) { return 0.0; }, DiscreteSpace::binary(3)) ==
          doctest::Approx(std::log(8.0)).epsilon(1e-15));
  }
  SUBCASE("single binary variable") {
    CHECK(enumerate_log_z([](std::span<const int> x) { return double(x[0]); },
                          DiscreteSpace::binary(1)) ==
          doctest::Approx(std::log(1 + std::exp(1.0))).epsilon(1e-15));
  }
  SUBCASE("3x3 Ising agrees with transfer matrix") {
    const double lz = enumerate_log_z([](std::span<const int> x) { return ising3_potential(x, 0.4); },
                                      DiscreteSpace::spins(9));
    CHECK(lz == doctest::Approx(ising3_transfer_log_z(0.4)).epsilon(1e-13));
  }
  SUBCASE("exp(log Z) equals the direct sum") {
    PairModel m(10);
    Rng r(11);
    for (std::size_t i = 0; i < m.num_params(); ++i) m.params()[i] = r.uniform(-1, 1);
    double direct = 0;
    DiscreteSpace::binary(10).for_each([&](std::span<const int> x) { direct += std::exp(m.potential(x)); });
    CHECK(std::exp(enumerate_log_z(m, DiscreteSpace::binary(10))) ==
          doctest::Approx(direct).epsilon(1e-12));
  }
  SUBCASE("sharded enumeration matches serial") {
    PairModel m(12);
    Rng r(5);
    for (std::size_t i = 0; i < m.num_params(); ++i) m.params()[i] = r.uniform(-1, 1);
    const auto space = DiscreteSpace::binary(12);
    const double serial = enumerate_log_z(m, space);
    EnumerationOptions opts;
    opts.threads = 4;
    CHECK(enumerate_log_z(m, space, opts) == doctest::Approx(serial).epsilon(1e-14));
    CHECK(enumerate_log_z(m, space, opts) == enumerate_log_z(m, space, opts));
  }
  SUBCASE("cap exceeded names the count") {
    EnumerationOptions opts;
    opts.cap = 100;
    try {
      enumerate_log_z([](std::span<const int>) { return 0.0; }, DiscreteSpace::binary(7), opts);
      FAIL("expected refusal");
    } catch (const EnumerationRefused& e) {
      CHECK(e.count() == 128);
      CHECK(std::string(e.what()).find("128") != std::string::npos);
    }
  }
}

TEST_CASE("enumerate_expectation") {
  PairModel m(3);
  m.params()[0] = 0.5;
  m.params()[3] = -0.7;
  const auto space = DiscreteSpace::binary(3);
  auto one = enumerate_expectation(m, space, [](std::span<const int>, std::span<double> s) { s[0] = 1; }, 1);
  CHECK(one[0] == doctest::Approx(1.0).epsilon(1e-15));

  auto center = enumerate_expectation(
      [] {
        static PairModel zero(9);
        return std::cref(zero);
      }(),
      DiscreteSpace::spins(9), [](std::span<const int> x, std::span<double> s) { s[0] = x[4]; }, 1);
  CHECK(std::abs(center[0]) < 1e-15);

  // Gradient of log Z equals the feature expectation, cross-checked by differences.
  auto g = enumerate_grad_log_z(m, space);
  auto fd = finite_diff_grad(
      [&](std::span<const double> t) {
        PairModel c(3);
        c.params().assign(t);
        return enumerate_log_z(c, space);
      },
      m.params().values());
  CHECK(max_relative_error(g, fd) < 1e-9);
}

TEST_CASE("tv_distance") {
  std::vector<double> a = {0.5, 0.5}, b = {0.75, 0.25}, c = {1, 0}, d = {0, 1};
  CHECK(tv_distance(a, a) == 0.0);
  CHECK(tv_distance(c, d) == 1.0);
  CHECK(tv_distance(a, b) == doctest::Approx(0.25).epsilon(1e-15));
  std::vector<double> e = {1.0};
  CHECK_THROWS_AS(tv_distance(a, e), ShapeMismatch);
}

TEST_CASE("finite_diff_grad") {
  PairModel m(4);
  Rng r(2);
  for (std::size_t i = 0; i < m.num_params(); ++i) m.params()[i] = r.uniform(-1, 1);
  const Config x = {1, 1, 0, 1};
  const std::vector<double> before(m.params().values().begin(), m.params().values().end());
  for (double h : {1e-5, 1e-3, 0.5}) {
    auto fd = finite_diff_grad(m, x, h);
    std::vector<double> f = {1, 1, 0, 1, 1};
    CHECK(max_relative_error(fd, f) < 1e-10);
  }
  CHECK(std::equal(before.begin(), before.end(), m.params().values().begin()));
  CHECK_THROWS_AS(finite_diff_grad(m, x, 0.0), InvalidArgument);
}

TEST_CASE("fisher check with a single latent path is exactly zero") {
  SinglePathModel m;
  const Config x = {1, 0};
  CHECK(fisher_equality_check(m, x) == 0.0);
}
