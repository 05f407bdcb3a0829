// Copyright 2026 The sigdyn Authors
// SPDX-License-Identifier: Apache-2.0

#include "sigdyn/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "sigdyn/error.hpp"
#include "sigdyn/matrix_io.hpp"
#include "sigdyn/rng.hpp"

namespace sigdyn {

TransitionMatrix build_dynamics(const Scenario& s, const PopulationIndex& index) {
  switch (s.dynamics.builder) {
    case DynamicsSpec::Builder::emd: {
      EmdBuildOptions opt;
      opt.threads = std::max(1u, s.threads);
      opt.use_closed_form = !s.dynamics.force_lp;
      return build_matrix_emd(index, s.omegas, s.dynamics.metric, s.dynamics.psi, opt);
    }
    case DynamicsSpec::Builder::timeofday: {
      auto p = build_matrix_timeofday(s.dynamics.blocks);
      if (p.size() != index.size())
        fail_validation("dynamics.blocks sum to " + std::to_string(p.size()) +
                        " states but the population space has K = " + std::to_string(index.size()));
      return p;
    }
    case DynamicsSpec::Builder::file: {
      auto p = read_matrix(s.dynamics.path);
      if (p.size() != index.size())
        fail_validation("dynamics.path: matrix has " + std::to_string(p.size()) +
                        " states but the population space has K = " + std::to_string(index.size()));
      return p;
    }
  }
  fail_validation("unknown dynamics builder");
}

const ProbeSamples* Ensemble::probe(std::size_t t) const {
  for (const auto& p : probes)
    if (p.t == t) return &p;
  return nullptr;
}

Simulation::Simulation(Scenario scenario)
    : scenario_(std::move(scenario)),
      index_(enumerate_populations(scenario_.omegas, scenario_.agents, scenario_.dynamics.max_states)),
      matrix_(build_dynamics(scenario_, index_)),
      sampler_(matrix_) {
  prepare();
}

Simulation::Simulation(Scenario scenario, TransitionMatrix matrix)
    : scenario_(std::move(scenario)),
      index_(enumerate_populations(scenario_.omegas, scenario_.agents, scenario_.dynamics.max_states)),
      matrix_(std::move(matrix)),
      sampler_(matrix_) {
  if (matrix_.size() != index_.size())
    fail_validation("transition matrix has " + std::to_string(matrix_.size()) +
                    " states but the population space has K = " + std::to_string(index_.size()));
  prepare();
}

void Simulation::prepare() {
  const Scenario& s = scenario_;
  if (s.costs.empty()) fail_validation("resources: need at least one resource");
  if (s.horizon < 1) fail_validation("simulation.horizon must be >= 1");
  const std::size_t K = index_.size();
  switch (s.initial_population.mode) {
    case InitialPopulation::Mode::fixed:
      if (s.initial_population.index >= K)
        fail_validation("simulation.initial_population index out of range");
      initial_.assign(K, 0.0);
      initial_[s.initial_population.index] = 1.0;
      break;
    case InitialPopulation::Mode::stationary:
      try {
        initial_ = stationary(matrix_);
        break;
      } catch (const Error&) {
        // Not unique: fall through to the uniform start.
      }
      [[fallthrough]];
    case InitialPopulation::Mode::uniform:
      initial_.assign(K, 1.0 / static_cast<double>(K));
      break;
  }
  if (s.initial_signal) {
    if (s.initial_signal->u.size() != s.resources() || s.initial_signal->v.size() != s.resources())
      fail_validation("simulation.initial_signal must give u and v for every resource");
    start_signal_ = *s.initial_signal;
  } else {
    start_signal_ = initial_signal(s.costs, s.agents);
  }
}

Trajectory Simulation::run_path(std::uint64_t path_id) const {
  const Scenario& s = scenario_;
  const CounterRng rng(s.master_seed, path_id);
  Trajectory traj;
  traj.reserve(s.horizon);

  std::size_t pop = TransitionSampler::draw(initial_, rng.uniform(0));
  Signal signal = start_signal_;
  CongestionProfile profile = aggregate_demand(s.omegas, index_[pop], signal);
  std::size_t t = 1;
  try {
    traj.push_back({signal, profile, pop, social_cost(profile, s.costs)});
    for (t = 2; t <= s.horizon; ++t) {
      pop = sampler_.next(pop, rng.uniform(t - 1));
      StepResult r = step(signal, profile, s.omegas, index_[pop], s.costs, s.q);
      signal = std::move(r.signal);
      profile = std::move(r.profile);
      traj.push_back({signal, profile, pop, social_cost(profile, s.costs)});
    }
  } catch (const Error& e) {
    throw Error(e.kind(), "path " + std::to_string(path_id) + ", step " + std::to_string(t) +
                              ": " + e.what());
  }
  return traj;
}

namespace {

// Welford accumulator with Chan et al. pairwise merge.
struct Moments {
  double n = 0.0, mean = 0.0, m2 = 0.0;

  void add(double x) {
    n += 1.0;
    const double d = x - mean;
    mean += d / n;
    m2 += d * (x - mean);
  }
  void merge(const Moments& o) {
    if (o.n == 0.0) return;
    if (n == 0.0) {
      *this = o;
      return;
    }
    const double total = n + o.n;
    const double d = o.mean - mean;
    mean += d * o.n / total;
    m2 += o.m2 + d * d * n * o.n / total;
    n = total;
  }
  double stddev() const { return n > 0.0 ? std::sqrt(std::max(m2, 0.0) / n) : 0.0; }
};

constexpr std::size_t kBlockPaths = 64;

}  // namespace

Ensemble Simulation::run_ensemble(std::size_t paths, unsigned threads) const {
  if (paths < 1) fail_validation("simulation.paths must be >= 1");
  const Scenario& s = scenario_;
  const std::size_t T = s.horizon;
  const std::size_t M = s.resources();
  const std::size_t stats = M + 1;  // counts per resource, then social cost

  std::vector<std::size_t> probe_times;
  if (s.retain_full) {
    for (std::size_t t = 1; t <= T; ++t) probe_times.push_back(t);
  } else {
    for (std::size_t t : s.probes)
      if (t >= 1 && t <= T) probe_times.push_back(t);
    std::sort(probe_times.begin(), probe_times.end());
    probe_times.erase(std::unique(probe_times.begin(), probe_times.end()), probe_times.end());
  }

  Ensemble ens;
  ens.paths = paths;
  ens.horizon = T;
  for (std::size_t t : probe_times) {
    ProbeSamples p;
    p.t = t;
    p.counts.assign(M, std::vector<double>(paths, 0.0));
    p.social_cost.assign(paths, 0.0);
    ens.probes.push_back(std::move(p));
  }

  const std::size_t blocks = (paths + kBlockPaths - 1) / kBlockPaths;
  std::vector<std::vector<Moments>> partial(blocks, std::vector<Moments>(T * stats));
  std::vector<std::string> failure(blocks);
  std::vector<ErrorKind> failure_kind(blocks, ErrorKind::runtime);

  auto run_block = [&](std::size_t b) {
    auto& acc = partial[b];
    const std::size_t first = b * kBlockPaths;
    const std::size_t last = std::min(paths, first + kBlockPaths);
    try {
      for (std::size_t path = first; path < last; ++path) {
        const Trajectory traj = run_path(path);
        for (std::size_t t = 0; t < T; ++t) {
          for (std::size_t m = 0; m < M; ++m)
            acc[t * stats + m].add(static_cast<double>(traj[t].profile.counts[m]));
          acc[t * stats + M].add(traj[t].social_cost);
        }
        for (auto& probe : ens.probes) {
          const TrajectoryStep& st = traj[probe.t - 1];
          for (std::size_t m = 0; m < M; ++m)
            probe.counts[m][path] = static_cast<double>(st.profile.counts[m]);
          probe.social_cost[path] = st.social_cost;
        }
      }
    } catch (const Error& e) {
      failure[b] = e.what();
      failure_kind[b] = e.kind();
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(blocks)));
  if (workers == 1) {
    for (std::size_t b = 0; b < blocks; ++b) run_block(b);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t b = w; b < blocks; b += workers) run_block(b);
      });
    for (auto& th : pool) th.join();
  }
  for (std::size_t b = 0; b < blocks; ++b)
    if (!failure[b].empty()) throw Error(failure_kind[b], failure[b]);

  std::vector<Moments> total(T * stats);
  for (std::size_t b = 0; b < blocks; ++b)
    for (std::size_t k = 0; k < T * stats; ++k) total[k].merge(partial[b][k]);

  ens.counts.assign(M, MomentSeries{std::vector<double>(T), std::vector<double>(T)});
  ens.social_cost = MomentSeries{std::vector<double>(T), std::vector<double>(T)};
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t m = 0; m < M; ++m) {
      ens.counts[m].mean[t] = total[t * stats + m].mean;
      ens.counts[m].stddev[t] = total[t * stats + m].stddev();
    }
    ens.social_cost.mean[t] = total[t * stats + M].mean;
    ens.social_cost.stddev[t] = total[t * stats + M].stddev();
  }
  return ens;
}

GridOptimum grid_optimum(std::span<const CostFunction> costs, double resolution) {
  if (costs.size() != 2)
    fail_validation("grid optimum needs exactly M = 2 resources (got " +
                    std::to_string(costs.size()) + ")");
  if (!(resolution > 0.0 && resolution <= 0.5))
    fail_validation("resolution must lie in (0, 0.5]");
  auto cost = [&](std::size_t m, double x) {
    const double v = costs[m].form(x);
    if (!std::isfinite(v) || v < 0.0)
      fail_runtime("cost of resource " + std::to_string(m) + " ('" + costs[m].form.text() +
                   "') is not finite and nonnegative at x=" + std::to_string(x));
    return v;
  };
  const auto steps = static_cast<std::size_t>(std::floor(1.0 / resolution + 1e-9));
  GridOptimum best{0.0, std::numeric_limits<double>::infinity()};
  for (std::size_t k = 0; k <= steps; ++k) {
    const double x = std::min(1.0, static_cast<double>(k) * resolution);
    const double value = x * cost(0, x) + (1.0 - x) * cost(1, 1.0 - x);
    if (value < best.value) best = {x, value};
  }
  return best;
}

}  // namespace sigdyn
