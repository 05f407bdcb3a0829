// Copyright 2026 The sigdyn Authors
// SPDX-License-Identifier: Apache-2.0

#include "sigdyn/transport.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>

#include "sigdyn/error.hpp"

namespace sigdyn {

const char* to_string(MetricKind kind) {
  return kind == MetricKind::substitution ? "substitution" : "wasserstein";
}

MetricKind metric_from_string(const std::string& name) {
  if (name == "substitution" || name == "discrete") return MetricKind::substitution;
  if (name == "wasserstein") return MetricKind::wasserstein;
  fail_validation("unknown metric '" + name + "' (expected substitution or wasserstein)");
}

GroundMatrix::GroundMatrix(std::size_t n, std::vector<std::int64_t> scaled, std::int64_t scale)
    : n_(n), cost_(std::move(scaled)), scale_(scale) {
  if (scale_ <= 0) fail_validation("ground matrix scale must be positive");
  if (cost_.size() != n_ * n_) fail_validation("ground matrix has wrong number of entries");
  for (std::size_t i = 0; i < n_; ++i) {
    if (cost_[i * n_ + i] != 0) fail_validation("ground matrix diagonal must be zero");
    for (std::size_t j = 0; j < n_; ++j) {
      if (cost_[i * n_ + j] < 0) fail_validation("ground matrix entries must be nonnegative");
      if (cost_[i * n_ + j] != cost_[j * n_ + i]) fail_validation("ground matrix must be symmetric");
    }
  }
}

GroundMatrix ground_matrix(MetricKind metric, const PolicySet& omegas) {
  const std::size_t n = omegas.size();
  std::vector<std::int64_t> cost(n * n, 0);
  if (metric == MetricKind::substitution) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) cost[i * n + j] = i == j ? 0 : 1;
    return GroundMatrix(n, std::move(cost), 1);
  }
  const std::int64_t d = omegas.common_denominator();
  std::vector<std::int64_t> scaled(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Rational& r = omegas.rationals()[i];
    scaled[i] = r.num * (d / r.den);
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) cost[i * n + j] = std::llabs(scaled[i] - scaled[j]);
  return GroundMatrix(n, std::move(cost), d);
}

namespace {

void check_totals(const Population& eta, const Population& gamma, std::size_t n) {
  if (eta.counts.size() != n || gamma.counts.size() != n)
    fail_validation("population length does not match the policy count");
  for (Count c : eta.counts)
    if (c < 0) fail_validation("populations must have nonnegative counts");
  for (Count c : gamma.counts)
    if (c < 0) fail_validation("populations must have nonnegative counts");
  if (eta.total() != gamma.total())
    fail_validation("populations have different totals (" + std::to_string(eta.total()) +
                    " vs " + std::to_string(gamma.total()) + ")");
}

// Successive shortest augmenting paths with Johnson potentials on the
// bipartite residual graph. Node layout: sources 0..n-1, sinks n..2n-1.
// Every augmentation exhausts a source, a sink, or a residual reverse arc,
// and all quantities stay integral.
class TransportSolver {
 public:
  TransportSolver(const GroundMatrix& h, std::span<const Count> supply,
                  std::span<const Count> demand)
      : n_(h.size()),
        h_(h),
        supply_(supply.begin(), supply.end()),
        demand_(demand.begin(), demand.end()),
        flow_(n_ * n_, 0),
        potential_(2 * n_, 0) {}

  TransportPlan solve() {
    Count remaining = 0;
    for (Count s : supply_) remaining += s;
    while (remaining > 0) {
      shortest_paths();
      // Cheapest reachable sink with outstanding demand.
      std::size_t sink = kNone;
      for (std::size_t j = 0; j < n_; ++j) {
        if (demand_[j] == 0 || dist_[n_ + j] == kInf) continue;
        if (sink == kNone || dist_[n_ + j] < dist_[n_ + sink]) sink = j;
      }
      if (sink == kNone) fail_runtime("transport: no augmenting path (infeasible instance)");
      for (std::size_t v = 0; v < 2 * n_; ++v)
        if (dist_[v] != kInf) potential_[v] += dist_[v];
      remaining -= augment(n_ + sink);
    }
    TransportPlan plan;
    plan.n = n_;
    plan.flows = flow_;
    plan.scale = h_.scale();
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j)
        plan.scaled_objective += flow_[i * n_ + j] * h_.scaled(i, j);
    return plan;
  }

 private:
  static constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max();
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  std::int64_t reduced(std::size_t from, std::size_t to, std::int64_t cost) const {
    return cost + potential_[from] - potential_[to];
  }

  // Dense Dijkstra from all sources with remaining supply.
  void shortest_paths() {
    const std::size_t V = 2 * n_;
    dist_.assign(V, kInf);
    parent_.assign(V, kNone);
    std::vector<bool> done(V, false);
    for (std::size_t i = 0; i < n_; ++i)
      if (supply_[i] > 0) dist_[i] = 0;
    for (;;) {
      std::size_t u = kNone;
      for (std::size_t v = 0; v < V; ++v)
        if (!done[v] && dist_[v] != kInf && (u == kNone || dist_[v] < dist_[u])) u = v;
      if (u == kNone) break;
      done[u] = true;
      if (u < n_) {
        // Forward arcs source u -> sink j, uncapacitated.
        for (std::size_t j = 0; j < n_; ++j) relax(u, n_ + j, reduced(u, n_ + j, h_.scaled(u, j)));
      } else {
        // Reverse arcs sink j -> source i where flow is positive.
        const std::size_t j = u - n_;
        for (std::size_t i = 0; i < n_; ++i)
          if (flow_[i * n_ + j] > 0) relax(u, i, reduced(u, i, -h_.scaled(i, j)));
      }
    }
  }

  void relax(std::size_t from, std::size_t to, std::int64_t w) {
    const std::int64_t cand = dist_[from] + w;
    if (cand < dist_[to]) {
      dist_[to] = cand;
      parent_[to] = from;
    }
  }

  Count augment(std::size_t sink_node) {
    // Bottleneck along the path back to a root source.
    Count amount = demand_[sink_node - n_];
    std::size_t v = sink_node;
    while (parent_[v] != kNone) {
      const std::size_t p = parent_[v];
      if (p >= n_) amount = std::min(amount, flow_[v * n_ + (p - n_)]);  // reverse arc
      v = p;
    }
    amount = std::min(amount, supply_[v]);
    supply_[v] -= amount;
    demand_[sink_node - n_] -= amount;
    v = sink_node;
    while (parent_[v] != kNone) {
      const std::size_t p = parent_[v];
      if (p < n_)
        flow_[p * n_ + (v - n_)] += amount;
      else
        flow_[v * n_ + (p - n_)] -= amount;
      v = p;
    }
    return amount;
  }

  std::size_t n_;
  const GroundMatrix& h_;
  std::vector<Count> supply_, demand_;
  std::vector<Count> flow_;
  std::vector<std::int64_t> potential_;
  std::vector<std::int64_t> dist_;
  std::vector<std::size_t> parent_;
};

}  // namespace

TransportPlan emd(const Population& eta, const Population& gamma, const GroundMatrix& h) {
  check_totals(eta, gamma, h.size());
  return TransportSolver(h, eta.counts, gamma.counts).solve();
}

Count emd_substitution_closed(const Population& eta, const Population& gamma) {
  check_totals(eta, gamma, eta.counts.size());
  Count moved = 0;
  for (std::size_t i = 0; i < eta.counts.size(); ++i)
    moved += std::max<Count>(eta.counts[i] - gamma.counts[i], 0);
  return moved;
}

std::int64_t emd_wasserstein_1d_scaled(const Population& eta, const Population& gamma,
                                       const PolicySet& omegas) {
  check_totals(eta, gamma, omegas.size());
  const std::int64_t d = omegas.common_denominator();
  const auto& w = omegas.rationals();
  std::int64_t work = 0;
  Count cumulative = 0;
  for (std::size_t i = 0; i + 1 < omegas.size(); ++i) {
    cumulative += eta.counts[i] - gamma.counts[i];
    const std::int64_t gap = w[i + 1].num * (d / w[i + 1].den) - w[i].num * (d / w[i].den);
    work += std::llabs(cumulative) * gap;
  }
  return work;
}

double emd_wasserstein_1d(const Population& eta, const Population& gamma,
                          const PolicySet& omegas) {
  return static_cast<double>(emd_wasserstein_1d_scaled(eta, gamma, omegas)) /
         static_cast<double>(omegas.common_denominator());
}

double population_distance(const Population& eta, const Population& gamma,
                           MetricKind metric, const PolicySet& omegas,
                           const GroundMatrix& h, bool use_closed_form) {
  if (!use_closed_form) return emd(eta, gamma, h).objective();
  if (metric == MetricKind::substitution)
    return static_cast<double>(emd_substitution_closed(eta, gamma));
  return emd_wasserstein_1d(eta, gamma, omegas);
}

}  // namespace sigdyn
