// Copyright 2026 The sigdyn Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <limits>

#include "sigdyn/dynamics.hpp"
#include "sigdyn/error.hpp"
#include "sigdyn/transport.hpp"

using namespace sigdyn;

namespace {

PolicySet grid(int n) {
  std::vector<Rational> r;
  for (int i = 0; i < n; ++i) r.push_back(Rational::make(i, n - 1));
  return PolicySet(std::move(r));
}

// Oracle: exhaustive search over every integer flow with the required
// marginals, costs taken straight from the ω values.
double brute_force_emd(const Population& eta, const Population& gamma, MetricKind metric,
                       const std::vector<double>& w) {
  const std::size_t n = eta.counts.size();
  auto ground = [&](std::size_t i, std::size_t j) {
    if (i == j) return 0.0;
    return metric == MetricKind::substitution ? 1.0 : std::abs(w[i] - w[j]);
  };
  std::vector<Count> col_left = gamma.counts;
  double best = std::numeric_limits<double>::infinity();
  std::function<void(std::size_t, std::size_t, Count, double)> rec =
      [&](std::size_t i, std::size_t j, Count row_left, double acc) {
        if (acc >= best) return;
        if (i == n) {
          best = acc;
          return;
        }
        if (j == n - 1) {
          if (row_left > col_left[j]) return;
          col_left[j] -= row_left;
          if (i + 1 < n)
            rec(i + 1, 0, eta.counts[i + 1], acc + row_left * ground(i, j));
          else
            rec(n, 0, 0, acc + row_left * ground(i, j));
          col_left[j] += row_left;
          return;
        }
        for (Count f = 0; f <= std::min(row_left, col_left[j]); ++f) {
          col_left[j] -= f;
          rec(i, j + 1, row_left - f, acc + f * ground(i, j));
          col_left[j] += f;
        }
      };
  rec(0, 0, eta.counts[0], 0.0);
  return best;
}

}  // namespace

TEST_CASE("ground matrices") {
  const auto w = grid(4);
  const auto sub = ground_matrix(MetricKind::substitution, w);
  const auto was = ground_matrix(MetricKind::wasserstein, w);
  CHECK(sub.scale() == 1);
  CHECK(was.scale() == 3);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(sub(i, j) == (i == j ? 0.0 : 1.0));
      CHECK(was.scaled(i, j) == std::abs(static_cast<long>(i) - static_cast<long>(j)));
    }
  CHECK_THROWS_AS(GroundMatrix(2, {0, 1, 2, 0}, 1), Error);
  CHECK_THROWS_AS(GroundMatrix(2, {1, 1, 1, 0}, 1), Error);
  CHECK_THROWS_AS(GroundMatrix(2, {0, -1, -1, 0}, 1), Error);
  CHECK(metric_from_string("wasserstein") == MetricKind::wasserstein);
  CHECK_THROWS_AS(metric_from_string("l2"), Error);
}

TEST_CASE("solver agrees with the brute-force oracle") {
  const PolicySet irregular({Rational::make(0, 1), Rational::make(1, 5), Rational::make(3, 4),
                             Rational::make(1, 1)});
  for (int policies = 2; policies <= 4; ++policies) {
    std::vector<PolicySet> sets{grid(policies)};
    if (policies == 4) sets.push_back(irregular);
    for (const auto& w : sets) {
      for (Count agents = 1; agents <= 6; ++agents) {
        const PopulationIndex index(w.size(), agents);
        for (MetricKind metric : {MetricKind::substitution, MetricKind::wasserstein}) {
          const auto h = ground_matrix(metric, w);
          for (std::size_t a = 0; a < index.size(); ++a)
            for (std::size_t b = 0; b < index.size(); ++b) {
              const auto plan = emd(index[a], index[b], h);
              const double oracle = brute_force_emd(index[a], index[b], metric, w.values());
              CHECK(plan.objective() == doctest::Approx(oracle).epsilon(1e-12));
              // Plan feasibility.
              for (std::size_t i = 0; i < w.size(); ++i) {
                Count row = 0, col = 0;
                for (std::size_t j = 0; j < w.size(); ++j) {
                  CHECK(plan.flow(i, j) >= 0);
                  row += plan.flow(i, j);
                  col += plan.flow(j, i);
                }
                CHECK(row == index[a].counts[i]);
                CHECK(col == index[b].counts[i]);
              }
            }
        }
      }
    }
  }
}

TEST_CASE("closed forms match the solver") {
  const auto w = grid(5);
  const PopulationIndex index(5, 5);
  const auto hs = ground_matrix(MetricKind::substitution, w);
  const auto hw = ground_matrix(MetricKind::wasserstein, w);
  for (std::size_t a = 0; a < index.size(); ++a)
    for (std::size_t b = 0; b < index.size(); ++b) {
      CHECK(emd(index[a], index[b], hs).scaled_objective ==
            emd_substitution_closed(index[a], index[b]));
      CHECK(emd(index[a], index[b], hw).scaled_objective ==
            emd_wasserstein_1d_scaled(index[a], index[b], w));
    }
}

TEST_CASE("metric axioms") {
  const auto w = grid(3);
  const PopulationIndex index(3, 5);
  for (MetricKind metric : {MetricKind::substitution, MetricKind::wasserstein}) {
    const auto h = ground_matrix(metric, w);
    std::vector<double> d(index.size() * index.size());
    for (std::size_t a = 0; a < index.size(); ++a)
      for (std::size_t b = 0; b < index.size(); ++b)
        d[a * index.size() + b] = population_distance(index[a], index[b], metric, w, h, false);
    const std::size_t k = index.size();
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b) {
        CHECK(d[a * k + b] == d[b * k + a]);
        CHECK((d[a * k + b] == 0.0) == (a == b));
        for (std::size_t c = 0; c < k; ++c) CHECK(d[a * k + c] <= d[a * k + b] + d[b * k + c] + 1e-12);
      }
  }
}

TEST_CASE("homogeneity under scaling both populations") {
  const auto w = grid(4);
  const PopulationIndex index(4, 3);
  for (MetricKind metric : {MetricKind::substitution, MetricKind::wasserstein}) {
    const auto h = ground_matrix(metric, w);
    for (std::size_t a = 0; a < index.size(); ++a)
      for (std::size_t b = 0; b < index.size(); ++b) {
        Population ea = index[a], eb = index[b];
        for (auto& c : ea.counts) c *= 3;
        for (auto& c : eb.counts) c *= 3;
        CHECK(emd(ea, eb, h).scaled_objective == 3 * emd(index[a], index[b], h).scaled_objective);
      }
  }
}

TEST_CASE("input validation") {
  const auto w = grid(3);
  const auto h = ground_matrix(MetricKind::wasserstein, w);
  CHECK_THROWS_AS(emd(Population{{1, 1, 0}}, Population{{1, 0, 0}}, h), Error);
  CHECK_THROWS_AS(emd(Population{{1, 1}}, Population{{1, 1}}, h), Error);
  CHECK_THROWS_AS(emd(Population{{-1, 2, 0}}, Population{{1, 0, 0}}, h), Error);
}

TEST_CASE("large populations stay exact") {
  const auto w = grid(6);
  const auto h = ground_matrix(MetricKind::wasserstein, w);
  const Population a{{400, 0, 250, 0, 0, 350}}, b{{0, 300, 100, 100, 500, 0}};
  CHECK(emd(a, b, h).scaled_objective == emd_wasserstein_1d_scaled(a, b, w));
  CHECK(emd(a, b, ground_matrix(MetricKind::substitution, w)).scaled_objective ==
        emd_substitution_closed(a, b));
}
