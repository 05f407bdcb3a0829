// Copyright 2026 The sigdyn Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "sigdyn/error.hpp"
#include "sigdyn/model.hpp"

using namespace sigdyn;

namespace {

CostFunction cost(const char* text) { return CostFunction{CostExpr::parse(text), {}}; }

PolicySet policies(std::initializer_list<std::pair<int, int>> fracs) {
  std::vector<Rational> r;
  for (auto [p, q] : fracs) r.push_back(Rational::make(p, q));
  return PolicySet(std::move(r));
}

Signal signal(std::vector<double> u, std::vector<double> v) { return Signal{std::move(u), std::move(v)}; }

}  // namespace

TEST_CASE("cost expressions parse and evaluate") {
  CHECK(CostExpr::parse("x+2")(0.1) == doctest::Approx(2.1).epsilon(1e-15));
  CHECK(CostExpr::parse("x^2 + 0.4")(0.5) == doctest::Approx(0.65));
  CHECK(CostExpr::parse("(x^3 + 0.7)/1.7")(0.5) == doctest::Approx(0.825 / 1.7));
  CHECK(CostExpr::parse("x/10 + 2")(0.3) == doctest::Approx(2.03));
  CHECK(CostExpr::parse("-x + 3 * 2")(1.0) == doctest::Approx(5.0));
  CHECK(CostExpr::parse("2*(x-1)^2")(0.0) == doctest::Approx(2.0));
  CHECK_THROWS_AS(CostExpr::parse("x +"), Error);
  CHECK_THROWS_AS(CostExpr::parse("sin(x)"), Error);
  CHECK_THROWS_AS(CostExpr::parse("x^0.5"), Error);
  CHECK_THROWS_AS(CostExpr::parse("(x"), Error);
}

TEST_CASE("eval_cost uses the load fraction") {
  CHECK(eval_cost(cost("x+2"), 2, 20) == doctest::Approx(2.1).epsilon(1e-15));
  CHECK(eval_cost(cost("x^2+0.4"), 0, 2) == 0.4);
  // Independent evaluation: 1 + (1/0.1)/22 = 1.4545454545454541 (Python).
  CHECK(eval_cost(cost("1 + 1/(1.1-x)/22"), 20, 20) == doctest::Approx(1.4545454545454541).epsilon(1e-15));
}

TEST_CASE("eval_cost rejects non-finite or negative results") {
  CHECK_THROWS_WITH_AS(eval_cost(cost("1/(1-x)"), 4, 4, 1),
                       doctest::Contains("resource 1"), Error);
  CHECK_THROWS_AS(eval_cost(cost("x - 1"), 0, 4), Error);
  CHECK_THROWS_AS(eval_cost(cost("x"), 5, 4), Error);
}

TEST_CASE("rationals") {
  CHECK(Rational::from_double(0.5) == Rational{1, 2});
  CHECK(Rational::from_double(1.0 / 3.0) == Rational{1, 3});
  CHECK(Rational::from_double(2.0 / 3.0) == Rational{2, 3});
  CHECK(Rational::from_double(0.45) == Rational{9, 20});
  CHECK(Rational::parse("2/6") == Rational{1, 3});
  CHECK(Rational::parse("0.25") == Rational{1, 4});
  CHECK(Rational::parse("1") == Rational{1, 1});
  CHECK_THROWS_AS(Rational::parse("a/b"), Error);
  CHECK_THROWS_AS(Rational::from_double(std::acos(-1.0) / 4.0), Error);
}

TEST_CASE("policy set invariants") {
  auto p = policies({{0, 1}, {1, 3}, {2, 3}, {1, 1}});
  CHECK(p.size() == 4);
  CHECK(p.common_denominator() == 3);
  CHECK_THROWS_AS(policies({{1, 2}, {1, 2}}), Error);
  CHECK_THROWS_AS(policies({{1, 2}, {0, 1}}), Error);
  CHECK_THROWS_AS(policies({{3, 2}}), Error);
  CHECK_THROWS_AS(PolicySet({}), Error);
}

TEST_CASE("update_signal") {
  std::vector<CostFunction> costs{cost("2")};
  const CongestionProfile n{{1}};

  SUBCASE("memoryless limit") {
    auto s = update_signal(signal({0.7}, {3.0}), n, costs, SmoothingParams::make(0, 0));
    CHECK(s.u[0] == 2.0);
    CHECK(s.v[0] == doctest::Approx(1.3));
  }
  SUBCASE("frozen limit") {
    auto prev = signal({0.7}, {3.0});
    auto s = update_signal(prev, n, costs, SmoothingParams::make(1, 1));
    CHECK(s == prev);
  }
  SUBCASE("hand arithmetic") {
    auto s = update_signal(signal({1.0}, {0.2}), n, costs, SmoothingParams::make(0.45, 0.5));
    CHECK(s.u[0] == doctest::Approx(1.55).epsilon(1e-15));
    CHECK(s.v[0] == doctest::Approx(0.6).epsilon(1e-15));
  }
}

TEST_CASE("choose_resource") {
  const Signal s = signal({1, 2}, {5, 1});
  CHECK(choose_resource(1.0, s) == 0);
  CHECK(choose_resource(0.0, s) == 1);
  CHECK(choose_resource(0.5, s) == 1);
  CHECK(choose_resource(0.3, signal({1, 1}, {1, 1})) == 0);
}

TEST_CASE("aggregate_demand") {
  const auto omegas = policies({{0, 1}, {1, 2}, {1, 1}});
  const Signal s = signal({1, 2}, {5, 1});
  CHECK(aggregate_demand(omegas, Population{{2, 0, 0}}, s).counts == std::vector<Count>{0, 2});
  CHECK(aggregate_demand(omegas, Population{{1, 0, 1}}, s).counts == std::vector<Count>{1, 1});
  CHECK(aggregate_demand(omegas, Population{{0, 0, 7}}, s).counts == std::vector<Count>{7, 0});
}

TEST_CASE("social_cost") {
  std::vector<CostFunction> pair3{cost("x + 2"), cost("1 + 1/(1.1-x)/22")};
  CHECK(social_cost(CongestionProfile{{1, 9}}, pair3) == doctest::Approx(1.3145454545454545));
  CHECK(social_cost(CongestionProfile{{10, 0}}, pair3) == doctest::Approx(3.0));
  std::vector<CostFunction> pair1{cost("x^2 + 0.4"), cost("(x^3 + 0.7)/1.7")};
  CHECK(social_cost(CongestionProfile{{1, 1}}, pair1) == doctest::Approx(0.5676470588235294));
}

TEST_CASE("initial signal is the cost at the uniform split") {
  std::vector<CostFunction> costs{cost("x"), cost("x"), cost("x")};
  auto s = initial_signal(costs, 4);  // split (2,1,1)
  CHECK(s.u == std::vector<double>{0.5, 0.25, 0.25});
  CHECK(s.v == std::vector<double>{0, 0, 0});
}

TEST_CASE("step: hand trace on the two-agent scenario") {
  // Costs x+2 and 1 + 1/(1.1-x)/22, Ω = {0, 1/2, 1}, q = (0.45, 0.5).
  std::vector<CostFunction> costs{cost("x + 2"), cost("1 + 1/(1.1-x)/22")};
  const auto omegas = policies({{0, 1}, {1, 2}, {1, 1}});
  const auto q = SmoothingParams::make(0.45, 0.5);
  const double c2_half = 1.0 + 1.0 / (0.6 * 22.0);
  const double c2_full = 1.0 + 1.0 / (0.1 * 22.0);

  Signal s0 = initial_signal(costs, 2);
  CHECK(s0.u[0] == doctest::Approx(2.5));
  CHECK(s0.u[1] == doctest::Approx(c2_half));
  // ω=0 ties on v = 0 -> resource 0; ω=1 picks the cheaper u -> resource 1.
  CongestionProfile n0 = aggregate_demand(omegas, Population{{1, 0, 1}}, s0);
  CHECK(n0.counts == std::vector<Count>{1, 1});

  // Costs at (1,1) equal the current u, so the signal stays put.
  auto r1 = step(s0, n0, omegas, Population{{0, 0, 2}}, costs, q);
  CHECK(r1.signal.u[0] == doctest::Approx(2.5));
  CHECK(r1.signal.u[1] == doctest::Approx(c2_half));
  CHECK(r1.signal.v[0] == doctest::Approx(0.0));
  CHECK(r1.profile.counts == std::vector<Count>{0, 2});

  auto r2 = step(r1.signal, r1.profile, omegas, Population{{2, 0, 0}}, costs, q);
  CHECK(r2.signal.u[0] == doctest::Approx(0.45 * 2.5 + 0.55 * 2.0));
  CHECK(r2.signal.u[1] == doctest::Approx(0.45 * c2_half + 0.55 * c2_full));
  CHECK(r2.signal.v[0] == doctest::Approx(0.5 * 0.5));
  CHECK(r2.signal.v[1] == doctest::Approx(0.5 * (c2_full - c2_half)));
  // ω=0 compares v: 0.25 vs ~0.189 -> resource 1.
  CHECK(r2.profile.counts == std::vector<Count>{0, 2});
}

TEST_CASE("constant costs drive u to the constant and v to zero") {
  std::vector<CostFunction> costs{cost("3"), cost("1.5")};
  const auto omegas = policies({{0, 1}, {1, 1}});
  const auto q = SmoothingParams::make(0.6, 0.6);
  Signal s = signal({10, 0}, {4, 2});
  CongestionProfile n{{1, 1}};
  for (int t = 0; t < 200; ++t) {
    auto r = step(s, n, omegas, Population{{1, 1}}, costs, q);
    s = r.signal;
    n = r.profile;
  }
  CHECK(s.u[0] == doctest::Approx(3.0));
  CHECK(s.u[1] == doctest::Approx(1.5));
  CHECK(s.v[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(s.v[1] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("frozen signals: step leaves s unchanged") {
  std::vector<CostFunction> costs{cost("x+1"), cost("2*x")};
  const auto omegas = policies({{0, 1}, {1, 2}, {1, 1}});
  const Signal s = signal({1.2, 0.4}, {0.3, 0.9});
  auto r = step(s, CongestionProfile{{2, 1}}, omegas, Population{{1, 1, 1}}, costs,
                SmoothingParams::make(1, 1));
  CHECK(r.signal == s);
  CHECK(r.profile == aggregate_demand(omegas, Population{{1, 1, 1}}, s));
}

TEST_CASE("properties over random inputs") {
  std::mt19937_64 gen(12345);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto omegas = policies({{0, 1}, {1, 4}, {1, 2}, {3, 4}, {1, 1}});
  std::vector<CostFunction> costs{cost("x+1"), cost("2*x^2+0.5"), cost("1.2")};

  for (int trial = 0; trial < 2000; ++trial) {
    Signal s{{}, {}};
    for (int m = 0; m < 3; ++m) {
      s.u.push_back(3 * unit(gen));
      s.v.push_back(3 * unit(gen));
    }
    Population pop{std::vector<Count>(5)};
    for (auto& c : pop.counts) c = static_cast<Count>(unit(gen) * 6);
    if (pop.total() == 0) pop.counts[0] = 1;

    // Conservation.
    auto n = aggregate_demand(omegas, pop, s);
    CHECK(n.total() == pop.total());

    for (std::size_t i = 0; i < omegas.size(); ++i) {
      const double w = omegas[i];
      const auto chosen = choose_resource(w, s);
      // Choice coherence.
      for (std::size_t m = 0; m < 3; ++m)
        CHECK(w * s.u[chosen] + (1 - w) * s.v[chosen] <= w * s.u[m] + (1 - w) * s.v[m]);
      // Scale equivariance, with a power-of-two factor so scores scale exactly.
      Signal scaled = s;
      for (auto& x : scaled.u) x *= 4.0;
      for (auto& x : scaled.v) x *= 4.0;
      CHECK(choose_resource(w, scaled) == chosen);
    }

    // Purity.
    const auto q = SmoothingParams::make(0.45, 0.5);
    auto a = step(s, n, omegas, pop, costs, q);
    auto b = step(s, n, omegas, pop, costs, q);
    CHECK(a.signal == b.signal);
    CHECK(a.profile == b.profile);
  }
}

TEST_CASE("monotone smoothing under a constant profile") {
  std::vector<CostFunction> costs{cost("x^2 + 1")};
  const CongestionProfile n{{3}};  // N = 3, so c = 2
  for (double q : {0.1, 0.5, 0.9}) {
    Signal s = signal({7.0}, {0.0});
    const double u0 = 7.0;
    for (int t = 1; t <= 40; ++t) {
      s = update_signal(s, n, costs, SmoothingParams::make(q, q));
      CHECK(std::abs(s.u[0] - 2.0) <= std::pow(q, t) * std::abs(u0 - 2.0) + 1e-12);
    }
  }
}
