// Copyright 2026 The sigdyn Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "sigdyn/analysis.hpp"
#include "sigdyn/error.hpp"

using namespace sigdyn;

namespace {

const SmoothingParams kRefQ = SmoothingParams::make(0.45, 0.5);

PolicySet grid(int n) {
  std::vector<Rational> r;
  for (int i = 0; i < n; ++i) r.push_back(Rational::make(i, n - 1));
  return PolicySet(std::move(r));
}

CostFunction cost(const char* text) { return CostFunction{CostExpr::parse(text), {}}; }

}  // namespace

TEST_CASE("lipschitz_bound hand arithmetic") {
  const double L[] = {1.0}, k[] = {0.01};
  CHECK(lipschitz_bound(kRefQ, 2, L, k) == doctest::Approx(0.971).epsilon(1e-14));
  const double zero[] = {0.0};
  CHECK(lipschitz_bound(kRefQ, 2, L, zero) == doctest::Approx(0.95).epsilon(1e-14));
  const double k2[] = {0.125};
  CHECK(lipschitz_bound(SmoothingParams::make(0, 1), 4, L, k2) == 1.5);
  CHECK(smoothing_factor(SmoothingParams::make(0.2, 0.9)) == 0.9);
  const double L2[] = {2.0, 0.5}, k3[] = {0.25, 0.5};
  CHECK(lipschitz_kappa_sum(L2, k3) == 0.75);
}

TEST_CASE("lipschitz_bound is monotone") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 5000; ++trial) {
    const double q1 = unit(gen), q2 = unit(gen), dq = unit(gen) * (1 - q1);
    const double L[] = {unit(gen), unit(gen)}, k[] = {unit(gen), unit(gen)};
    const Count n = 1 + static_cast<Count>(unit(gen) * 30);
    const auto q = SmoothingParams::make(q1, q2);
    const double base = lipschitz_bound(q, n, L, k);
    CHECK(base >= 0);
    CHECK(lipschitz_bound(q, n + 1, L, k) >= base);
    // In q1 the bound only grows in the costless limit; otherwise the
    // (2−q1−q2) factor shrinks faster than the max term can rise.
    const double zero[] = {0.0, 0.0};
    CHECK(lipschitz_bound(SmoothingParams::make(q1 + dq, q2), n, L, zero) >=
          lipschitz_bound(q, n, L, zero));
    const double shift = lipschitz_bound(SmoothingParams::make(q1 + dq, q2), n, L, k) - base;
    CHECK(shift <= dq * (1 - n * lipschitz_kappa_sum(L, k)) + 1e-12);
    double Lb[] = {L[0] + unit(gen), L[1]}, kb[] = {k[0], k[1] + unit(gen)};
    CHECK(lipschitz_bound(q, n, Lb, k) >= base);
    CHECK(lipschitz_bound(q, n, L, kb) >= base);
  }
}

TEST_CASE("q_condition on the 0.01 grid") {
  for (int i = 0; i <= 100; ++i)
    for (int j = 0; j <= 100; ++j) {
      const auto q = SmoothingParams::make(i / 100.0, j / 100.0);
      CHECK(q_condition(q) == (j > i && j < 100));
    }
  CHECK(q_condition(kRefQ));
  CHECK_FALSE(q_condition(SmoothingParams::make(0.5, 0.5)));
  CHECK_FALSE(q_condition(SmoothingParams::make(0.1, 1.0)));
}

TEST_CASE("kappa_budget") {
  const double k[] = {1.0, 1.0};
  for (double kp : kappa_budget(kRefQ, 2, 2, k)) CHECK(kp == doctest::Approx(84.0).epsilon(1e-12));
  const double z[] = {0.0, 2.0};
  const auto b = kappa_budget(kRefQ, 2, 2, z);
  CHECK(b[0] == 0.0);
  const auto b4 = kappa_budget(kRefQ, 4, 2, z);
  CHECK(b4[1] == doctest::Approx(2 * b[1]).epsilon(1e-14));
  CHECK_THROWS_AS(kappa_budget(SmoothingParams::make(0.5, 0.5), 2, 2, k), Error);
}

TEST_CASE("kappa budget satisfies the sufficient condition") {
  // With L_m = 1/κ′_m the condition Σ L_m κ_m < limit holds with equality
  // shared over M resources; any strictly smaller L certifies.
  const double k[] = {0.3, 0.7};
  const auto kp = kappa_budget(kRefQ, 3, 2, k);
  const double L[] = {0.999 / kp[0], 0.999 / kp[1]};
  const auto pop = PopulationIndex(3, 3);
  const auto p = build_matrix_emd(pop, grid(3), MetricKind::wasserstein, 0.5);
  const auto r = certify(p, pop, kRefQ, L, k);
  CHECK(r.kappa_condition);
  CHECK(r.certified);
  CHECK(r.kappa_sum < r.kappa_limit);
}

TEST_CASE("certify verdicts") {
  const PopulationIndex index(3, 2);
  const auto p = build_matrix_emd(index, grid(3), MetricKind::wasserstein, 0.4061);
  const double L[] = {1.0};

  SUBCASE("sub-unit bound certifies") {
    const double k[] = {0.01};
    const auto r = certify(p, index, kRefQ, L, k);
    CHECK(r.certified);
    CHECK(r.q_condition);
    CHECK(r.kappa_condition);
    CHECK(r.average_log == doctest::Approx(std::log(0.971)).epsilon(1e-12));
    for (double b : r.bounds) CHECK(b == doctest::Approx(0.971).epsilon(1e-14));
    REQUIRE(r.kappa_prime.size() == 1);
  }
  SUBCASE("bound of exactly one does not") {
    const double k[] = {0.0};
    const auto r = certify(p, index, SmoothingParams::make(0, 1), L, k);
    CHECK(r.average_log == 0.0);
    CHECK_FALSE(r.certified);
    CHECK_FALSE(r.q_condition);
    CHECK(r.kappa_prime.empty());
  }
  SUBCASE("violated sufficient condition") {
    const double k[] = {0.1};
    const auto r = certify(p, index, kRefQ, L, k);
    CHECK_FALSE(r.kappa_condition);
    CHECK_FALSE(r.certified);
  }
  SUBCASE("verdict equals L < 1 for the uniform bound") {
    for (double kv = 0.0; kv < 0.05; kv += 0.0005) {
      const double k[] = {kv};
      const auto r = certify(p, index, kRefQ, L, k);
      CHECK(r.certified == (lipschitz_bound(kRefQ, 2, L, k) < 1));
    }
  }
  SUBCASE("per-population refinement never loosens the bound") {
    const double k[] = {0.02};
    CertifyOptions opt;
    opt.refine_per_population = true;
    const auto coarse = certify(p, index, kRefQ, L, k);
    const auto fine = certify(p, index, kRefQ, L, k, opt);
    CHECK(fine.refined);
    for (std::size_t j = 0; j < index.size(); ++j) CHECK(fine.bounds[j] <= coarse.bounds[j]);
    // (1,1,0) has max count 1, so N is replaced by 1.
    const auto j = *index.find(Population{{1, 1, 0}});
    CHECK(fine.bounds[j] == doctest::Approx(0.95 + 1.05 * 0.02).epsilon(1e-14));
  }
}

TEST_CASE("empirical Lipschitz probe") {
  const auto w = grid(3);
  const Population pop{{1, 1, 1}};

  SUBCASE("constant costs stay under the smoothing factor") {
    std::vector<CostFunction> costs{cost("1.5"), cost("2")};
    for (auto q : {kRefQ, SmoothingParams::make(0.2, 0.9), SmoothingParams::make(0.7, 0.3)}) {
      const double e = empirical_lipschitz(w, costs, q, pop, 500, 11, 4.0);
      CHECK(e <= smoothing_factor(q) + 1e-9);
      CHECK(e > 0);
    }
  }
  SUBCASE("deterministic and monotone in trials") {
    std::vector<CostFunction> costs{cost("x + 2"), cost("1 + 1/(1.1-x)/22")};
    double prev = 0;
    for (std::size_t trials : {1, 10, 100, 400}) {
      const double e = empirical_lipschitz(w, costs, kRefQ, pop, trials, 99, 6.0);
      CHECK(e >= prev);
      CHECK(e == empirical_lipschitz(w, costs, kRefQ, pop, trials, 99, 6.0));
      prev = e;
    }
  }
}

TEST_CASE("wasserstein_1d_samples") {
  const double a[] = {0, 0}, b[] = {1, 1};
  CHECK(wasserstein_1d_samples(a, b) == 1.0);
  CHECK(wasserstein_1d_samples(a, a) == 0.0);
  const double c[] = {1, 2, 3};
  CHECK_THROWS_AS(wasserstein_1d_samples(a, c), Error);
  CHECK_THROWS_AS(wasserstein_1d_samples(std::span<const double>{}, std::span<const double>{}), Error);

  std::mt19937_64 gen(3);
  std::uniform_int_distribution<int> level(0, 4);
  const auto w = grid(5);
  const auto h = ground_matrix(MetricKind::wasserstein, w);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + trial % 17;
    std::vector<double> x(n), y(n), z(n);
    Population hx{std::vector<Count>(5)}, hy{std::vector<Count>(5)};
    for (std::size_t i = 0; i < n; ++i) {
      const int lx = level(gen), ly = level(gen);
      x[i] = lx / 4.0;
      y[i] = ly / 4.0;
      z[i] = level(gen) / 4.0;
      ++hx.counts[lx];
      ++hy.counts[ly];
    }
    const double d = wasserstein_1d_samples(x, y);
    CHECK(d == doctest::Approx(emd(hx, hy, h).objective() / n).epsilon(1e-9));
    CHECK(d == wasserstein_1d_samples(y, x));
    CHECK(wasserstein_1d_samples(x, z) <= d + wasserstein_1d_samples(y, z) + 1e-12);
    std::vector<double> shuffled = x;
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    CHECK(wasserstein_1d_samples(shuffled, y) == d);
  }
}

TEST_CASE("convergence_diagnostic needs at least two paths") {
  Ensemble e;
  e.paths = 1;
  e.horizon = 2;
  e.probes = {ProbeSamples{1, {{1.0}}, {0.0}}, ProbeSamples{2, {{1.0}}, {0.0}}};
  const std::size_t times[] = {1, 2};
  CHECK_THROWS_AS(convergence_diagnostic(e, 0, times), Error);
}
