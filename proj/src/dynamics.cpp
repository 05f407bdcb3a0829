// Copyright 2026 The sigdyn Authors
// SPDX-License-Identifier: Apache-2.0

#include "sigdyn/dynamics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "sigdyn/error.hpp"

namespace sigdyn {

std::optional<std::size_t> population_count(std::size_t policies, Count agents,
                                            std::size_t limit) {
  // C(n + k − 1, k) built up as C(k+i, i) for i = 1..n−1, each step exact.
  unsigned __int128 value = 1;
  const auto k = static_cast<unsigned __int128>(agents);
  for (std::size_t i = 1; i < policies; ++i) {
    value = value * (k + i) / i;
    if (value > limit) return std::nullopt;
  }
  if (value > limit) return std::nullopt;
  return static_cast<std::size_t>(value);
}

PopulationIndex::PopulationIndex(std::size_t policies, Count agents, std::size_t max_states)
    : policies_(policies), agents_(agents) {
  if (policies < 1) fail_validation("need at least one policy");
  if (agents < 1) fail_validation("need at least one agent");
  auto k = population_count(policies, agents, max_states);
  if (!k) {
    std::ostringstream os;
    os << "population space for " << policies << " policies and " << agents
       << " agents exceeds the state cap of " << max_states
       << " (K = C(" << policies << "+" << agents << "-1, " << agents
       << ")); reduce N or |Omega|, or raise dynamics.max_states";
    fail_capacity(os.str());
  }
  pops_.reserve(*k);
  // The first coordinate varies slowest and the last absorbs the remainder,
  // which yields ascending lexicographic order.
  std::vector<Count> c(policies, 0);
  auto fill = [&](auto&& self, std::size_t pos, Count remaining) -> void {
    if (pos + 1 == policies) {
      c[pos] = remaining;
      pops_.push_back(Population{c});
      return;
    }
    for (Count v = 0; v <= remaining; ++v) {
      c[pos] = v;
      self(self, pos + 1, remaining - v);
    }
  };
  fill(fill, 0, agents);
  if (pops_.size() != *k) fail_runtime("population enumeration produced the wrong count");
}

std::optional<std::size_t> PopulationIndex::find(const Population& pop) const {
  auto it = std::lower_bound(pops_.begin(), pops_.end(), pop);
  if (it == pops_.end() || *it != pop) return std::nullopt;
  return static_cast<std::size_t>(it - pops_.begin());
}

PopulationIndex enumerate_populations(const PolicySet& omegas, Count agents,
                                      std::size_t max_states) {
  return PopulationIndex(omegas.size(), agents, max_states);
}

TransitionMatrix::TransitionMatrix(std::size_t k, std::vector<double> entries, MatrixInfo info)
    : k_(k), p_(std::move(entries)), info_(std::move(info)) {
  if (k_ == 0) fail_validation("transition matrix must have at least one state");
  if (p_.size() != k_ * k_) fail_validation("transition matrix entry count is not K*K");
  for (double x : p_)
    if (!(x >= 0.0 && x <= 1.0)) fail_validation("transition probabilities must lie in [0,1]");
  if (max_row_defect() > 1e-9) fail_validation("transition matrix rows must sum to 1");
}

double TransitionMatrix::max_row_defect() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < k_; ++i) {
    double s = 0.0;
    for (double x : row(i)) s += x;
    worst = std::max(worst, std::abs(s - 1.0));
  }
  return worst;
}

TransitionMatrix build_matrix_emd(const PopulationIndex& index, const PolicySet& omegas,
                                  MetricKind metric, double psi,
                                  const EmdBuildOptions& options) {
  if (!(psi > 0.0 && psi < 1.0)) fail_validation("dynamics.psi must lie in (0,1)");
  if (index.policies() != omegas.size())
    fail_validation("population index and policy set disagree on |Omega|");
  const std::size_t K = index.size();
  const GroundMatrix h = ground_matrix(metric, omegas);

  std::vector<double> delta(K * K, 0.0);
  const unsigned workers = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(K)));
  std::vector<std::uint64_t> computed(workers, 0);
  auto work = [&](unsigned w) {
    // Rows are dealt round-robin; every cell is written by exactly one worker.
    for (std::size_t i = w; i < K; i += workers) {
      for (std::size_t j = i + 1; j < K; ++j) {
        const double d = population_distance(index[i], index[j], metric, omegas, h,
                                             options.use_closed_form);
        delta[i * K + j] = d;
        delta[j * K + i] = d;
        ++computed[w];
      }
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }

  std::vector<double> p(K * K);
  for (std::size_t i = 0; i < K; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < K; ++j) {
      p[i * K + j] = std::pow(psi, delta[i * K + j]);
      sum += p[i * K + j];
    }
    for (std::size_t j = 0; j < K; ++j) p[i * K + j] /= sum;
  }

  MatrixInfo info;
  info.builder = "emd";
  info.metric = metric;
  info.psi = psi;
  info.omegas = omegas.rationals();
  info.agents = index.agents();
  for (auto c : computed) info.distance_computations += c;
  return TransitionMatrix(K, std::move(p), std::move(info));
}

TransitionMatrix build_matrix_timeofday(std::span<const std::size_t> block_sizes) {
  if (block_sizes.empty()) fail_validation("dynamics.blocks must list at least one block");
  std::vector<std::size_t> offset;
  std::size_t K = 0;
  for (std::size_t b : block_sizes) {
    if (b == 0) fail_validation("dynamics.blocks entries must be positive");
    offset.push_back(K);
    K += b;
  }
  std::vector<double> p(K * K, 0.0);
  const std::size_t T = block_sizes.size();
  for (std::size_t l = 0; l < T; ++l) {
    const std::size_t next = (l + 1) % T;
    const double prob = 1.0 / static_cast<double>(block_sizes[next]);
    for (std::size_t i = offset[l]; i < offset[l] + block_sizes[l]; ++i)
      for (std::size_t j = offset[next]; j < offset[next] + block_sizes[next]; ++j)
        p[i * K + j] = prob;
  }
  MatrixInfo info;
  info.builder = "timeofday";
  info.blocks.assign(block_sizes.begin(), block_sizes.end());
  return TransitionMatrix(K, std::move(p), std::move(info));
}

std::vector<std::vector<std::size_t>> closed_classes(const TransitionMatrix& p) {
  const std::size_t K = p.size();
  // Iterative Tarjan on the support graph.
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(K, kUnset), low(K, 0), comp(K, kUnset);
  std::vector<bool> on_stack(K, false);
  std::vector<std::size_t> stack;
  std::vector<std::pair<std::size_t, std::size_t>> call;  // (node, next neighbour)
  std::size_t counter = 0, ncomp = 0;
  for (std::size_t root = 0; root < K; ++root) {
    if (index[root] != kUnset) continue;
    call.emplace_back(root, 0);
    while (!call.empty()) {
      auto& [v, next] = call.back();
      if (next == 0 && index[v] == kUnset) {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack[v] = true;
      }
      bool descended = false;
      while (next < K) {
        const std::size_t w = next++;
        if (p(v, w) <= 0.0) continue;
        if (index[w] == kUnset) {
          call.emplace_back(w, 0);
          descended = true;
          break;
        }
        if (on_stack[w]) low[v] = std::min(low[v], index[w]);
      }
      if (descended) continue;
      if (low[v] == index[v]) {
        for (;;) {
          const std::size_t w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = ncomp;
          if (w == v) break;
        }
        ++ncomp;
      }
      const std::size_t finished = v;
      call.pop_back();
      if (!call.empty()) {
        const std::size_t parent = call.back().first;
        low[parent] = std::min(low[parent], low[finished]);
      }
    }
  }
  std::vector<bool> leaks(ncomp, false);
  for (std::size_t i = 0; i < K; ++i)
    for (std::size_t j = 0; j < K; ++j)
      if (p(i, j) > 0.0 && comp[i] != comp[j]) leaks[comp[i]] = true;
  std::vector<std::vector<std::size_t>> members(ncomp);
  for (std::size_t i = 0; i < K; ++i) members[comp[i]].push_back(i);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t c = 0; c < ncomp; ++c)
    if (!leaks[c]) out.push_back(std::move(members[c]));
  std::sort(out.begin(), out.end());
  return out;
}

double stationary_residual(const TransitionMatrix& p, std::span<const double> m) {
  const std::size_t K = p.size();
  std::vector<double> mp(K, 0.0);
  for (std::size_t i = 0; i < K; ++i) {
    if (m[i] == 0.0) continue;
    for (std::size_t j = 0; j < K; ++j) mp[j] += m[i] * p(i, j);
  }
  double r = 0.0;
  for (std::size_t j = 0; j < K; ++j) r += std::abs(mp[j] - m[j]);
  return r;
}

namespace {

constexpr std::size_t kDirectSolveLimit = 2000;

void normalize(std::vector<double>& m) {
  double sum = 0.0;
  for (double& x : m) {
    x = std::max(x, 0.0);
    sum += x;
  }
  for (double& x : m) x /= sum;
}

std::vector<double> stationary_direct(const TransitionMatrix& p) {
  const auto K = static_cast<Eigen::Index>(p.size());
  Eigen::MatrixXd a(K, K);
  for (Eigen::Index i = 0; i < K; ++i)
    for (Eigen::Index j = 0; j < K; ++j)
      a(j, i) = p(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) - (i == j ? 1.0 : 0.0);
  a.row(K - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(K);
  rhs(K - 1) = 1.0;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  Eigen::VectorXd m = lu.solve(rhs);
  // One step of iterative refinement.
  Eigen::VectorXd r = rhs - a * m;
  m += lu.solve(r);
  std::vector<double> out(m.data(), m.data() + K);
  normalize(out);
  return out;
}

// Power iteration on the lazy chain (P + I)/2, which shares the stationary
// vector of P and is aperiodic.
std::vector<double> stationary_iterative(const TransitionMatrix& p) {
  const std::size_t K = p.size();
  std::vector<double> m(K, 1.0 / static_cast<double>(K)), next(K);
  for (int iter = 0; iter < 100000; ++iter) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < K; ++i) {
      const double mi = 0.5 * m[i];
      if (mi == 0.0) continue;
      next[i] += mi;
      for (std::size_t j = 0; j < K; ++j) next[j] += mi * p(i, j);
    }
    double change = 0.0;
    for (std::size_t j = 0; j < K; ++j) change += std::abs(next[j] - m[j]);
    m.swap(next);
    if (change < 1e-14) break;
  }
  normalize(m);
  return m;
}

}  // namespace

std::vector<double> stationary(const TransitionMatrix& p) {
  auto classes = closed_classes(p);
  if (classes.size() != 1) {
    std::ostringstream os;
    os << "stationary distribution is not unique: the chain has " << classes.size()
       << " closed communicating classes";
    for (std::size_t c = 0; c < classes.size() && c < 8; ++c) {
      os << (c == 0 ? ": " : "; ") << "{";
      for (std::size_t i = 0; i < classes[c].size() && i < 10; ++i)
        os << (i ? "," : "") << classes[c][i];
      if (classes[c].size() > 10) os << ",...";
      os << "}";
    }
    fail_runtime(os.str());
  }
  if (p.size() == 1) return {1.0};
  return p.size() <= kDirectSolveLimit ? stationary_direct(p) : stationary_iterative(p);
}

std::size_t sample_next(const TransitionMatrix& p, std::size_t current, double u) {
  return TransitionSampler::draw(p.row(current), u);
}

std::size_t TransitionSampler::draw(std::span<const double> probabilities, double u) {
  double c = 0.0;
  std::size_t last = 0;
  for (std::size_t j = 0; j < probabilities.size(); ++j) {
    if (probabilities[j] <= 0.0) continue;
    c += probabilities[j];
    last = j;
    if (u < c) return j;
  }
  return last;
}

TransitionSampler::TransitionSampler(const TransitionMatrix& p)
    : k_(p.size()), cdf_(k_ * k_), last_positive_(k_, 0) {
  for (std::size_t i = 0; i < k_; ++i) {
    double c = 0.0;
    for (std::size_t j = 0; j < k_; ++j) {
      const double x = p(i, j);
      if (x > 0.0) {
        c += x;
        last_positive_[i] = j;
      }
      cdf_[i * k_ + j] = c;
    }
  }
}

std::size_t TransitionSampler::next(std::size_t current, double u) const {
  const double* begin = cdf_.data() + current * k_;
  const double* end = begin + k_;
  const double* it = std::upper_bound(begin, end, u);
  if (it == end) return last_positive_[current];
  return static_cast<std::size_t>(it - begin);
}

}  // namespace sigdyn
