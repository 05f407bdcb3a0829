// Copyright 2026 The sigdyn Authors
// SPDX-License-Identifier: Apache-2.0

#include "sigdyn/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "sigdyn/error.hpp"
#include "sigdyn/rng.hpp"

namespace sigdyn {

double smoothing_factor(const SmoothingParams& q) { return std::max(q.q2, 1.0 + q.q1 - q.q2); }

double lipschitz_kappa_sum(std::span<const double> lipschitz, std::span<const double> kappa) {
  if (lipschitz.size() != kappa.size())
    fail_validation("need one Lipschitz constant and one kappa per resource");
  double sum = 0.0;
  for (std::size_t m = 0; m < lipschitz.size(); ++m) {
    if (lipschitz[m] < 0.0 || kappa[m] < 0.0)
      fail_validation("Lipschitz constants and kappa must be nonnegative");
    sum += lipschitz[m] * kappa[m];
  }
  return sum;
}

namespace {

double bound_with_weight(const SmoothingParams& q, double weight, double kappa_sum) {
  return smoothing_factor(q) + (2.0 - q.q1 - q.q2) * weight * kappa_sum;
}

// 1 − max{q2, 1+q1−q2} written as min{1−q2, q2−q1}, which avoids the
// cancellation in 1 − (1 + q1 − q2).
double contraction_margin(const SmoothingParams& q) { return std::min(1.0 - q.q2, q.q2 - q.q1); }

}  // namespace

double lipschitz_bound(const SmoothingParams& q, Count agents,
                       std::span<const double> lipschitz, std::span<const double> kappa) {
  return bound_with_weight(q, static_cast<double>(agents), lipschitz_kappa_sum(lipschitz, kappa));
}

bool q_condition(const SmoothingParams& q) { return q.q2 > q.q1 && q.q2 < 1.0; }

std::vector<double> kappa_budget(const SmoothingParams& q, Count agents, std::size_t resources,
                                 std::span<const double> kappa) {
  if (!q_condition(q))
    fail_validation("certificate unavailable: the contractivity condition needs q2 > q1 and q2 < 1 "
                    "(got q1=" + std::to_string(q.q1) + ", q2=" + std::to_string(q.q2) + ")");
  const double scale = static_cast<double>(resources) * static_cast<double>(agents) *
                       (2.0 - q.q1 - q.q2) / contraction_margin(q);
  std::vector<double> out;
  out.reserve(kappa.size());
  for (double k : kappa) out.push_back(k * scale);
  return out;
}

ContractivityReport certify(const TransitionMatrix& p, const PopulationIndex& index,
                            const SmoothingParams& q, std::span<const double> lipschitz,
                            std::span<const double> kappa, const CertifyOptions& options) {
  if (p.size() != index.size())
    fail_validation("transition matrix size differs from the population count");
  ContractivityReport r;
  r.refined = options.refine_per_population;
  r.kappa_sum = lipschitz_kappa_sum(lipschitz, kappa);
  r.q_condition = q_condition(q);
  const double agents = static_cast<double>(index.agents());
  r.kappa_limit = contraction_margin(q) / (agents * (2.0 - q.q1 - q.q2));
  r.kappa_condition = r.kappa_sum < r.kappa_limit;
  if (r.q_condition) r.kappa_prime = kappa_budget(q, index.agents(), lipschitz.size(), kappa);

  r.stationary = stationary(p);
  r.bounds.resize(index.size());
  for (std::size_t j = 0; j < index.size(); ++j) {
    double weight = agents;
    if (options.refine_per_population) {
      const auto& c = index[j].counts;
      weight = static_cast<double>(*std::max_element(c.begin(), c.end()));
    }
    r.bounds[j] = bound_with_weight(q, weight, r.kappa_sum);
  }
  r.average_log = 0.0;
  for (std::size_t j = 0; j < index.size(); ++j)
    if (r.stationary[j] > 0.0) r.average_log += r.stationary[j] * std::log(r.bounds[j]);
  r.certified = r.average_log < 0.0;
  return r;
}

namespace {

Signal one_step_map(const PolicySet& omegas, std::span<const CostFunction> costs,
                    const SmoothingParams& q, const Population& pop, const Signal& x) {
  return update_signal(x, aggregate_demand(omegas, pop, x), costs, q);
}

double l1_distance(const Signal& a, const Signal& b) {
  double d = 0.0;
  for (std::size_t m = 0; m < a.u.size(); ++m)
    d += std::abs(a.u[m] - b.u[m]) + std::abs(a.v[m] - b.v[m]);
  return d;
}

}  // namespace

double empirical_lipschitz(const PolicySet& omegas, std::span<const CostFunction> costs,
                           const SmoothingParams& q, const Population& pop, std::size_t trials,
                           std::uint64_t seed, double signal_scale) {
  if (trials < 1) fail_validation("empirical_lipschitz: trials must be >= 1");
  const std::size_t M = costs.size();
  double best = 0.0;
  for (std::size_t k = 0; k < trials; ++k) {
    const CounterRng rng(seed, k);
    Signal x{std::vector<double>(M), std::vector<double>(M)};
    Signal y = x;
    std::uint64_t c = 0;
    for (std::size_t m = 0; m < M; ++m) {
      x.u[m] = signal_scale * rng.uniform(c++);
      x.v[m] = signal_scale * rng.uniform(c++);
      y.u[m] = signal_scale * rng.uniform(c++);
      y.v[m] = signal_scale * rng.uniform(c++);
    }
    const double dx = l1_distance(x, y);
    if (dx == 0.0) continue;  // ratio undefined
    const double dw = l1_distance(one_step_map(omegas, costs, q, pop, x),
                                  one_step_map(omegas, costs, q, pop, y));
    best = std::max(best, dw / dx);
  }
  return best;
}

double empirical_lipschitz(const Scenario& scenario, const Population& pop, std::size_t trials,
                           std::uint64_t seed) {
  double cmax = 0.0;
  for (std::size_t m = 0; m < scenario.costs.size(); ++m)
    for (Count n = 0; n <= scenario.agents; ++n)
      cmax = std::max(cmax, eval_cost(scenario.costs[m], n, scenario.agents, m));
  const double scale = cmax > 0.0 ? 2.0 * cmax : 1.0;
  return empirical_lipschitz(scenario.omegas, scenario.costs, scenario.q, pop, trials, seed, scale);
}

double wasserstein_1d_samples(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || a.size() != b.size())
    fail_validation("wasserstein_1d_samples: samples must be nonempty and of equal size");
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < sa.size(); ++i) sum += std::abs(sa[i] - sb[i]);
  return sum / static_cast<double>(sa.size());
}

std::vector<double> convergence_diagnostic(const Ensemble& ensemble, std::size_t resource,
                                           std::span<const std::size_t> times) {
  if (ensemble.paths < 2) fail_validation("convergence diagnostic needs at least 2 paths");
  std::vector<double> out;
  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    const ProbeSamples* a = ensemble.probe(times[k]);
    const ProbeSamples* b = ensemble.probe(times[k + 1]);
    if (!a || !b)
      fail_validation("convergence diagnostic: time " +
                      std::to_string(a ? times[k + 1] : times[k]) + " was not retained");
    if (resource >= a->counts.size()) fail_validation("convergence diagnostic: resource out of range");
    out.push_back(wasserstein_1d_samples(a->counts[resource], b->counts[resource]));
  }
  return out;
}

}  // namespace sigdyn
