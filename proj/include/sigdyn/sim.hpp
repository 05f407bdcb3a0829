// Copyright 2026 The sigdyn Authors
// SPDX-License-Identifier: Apache-2.0

// Monte-Carlo execution of the closed signalling loop.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sigdyn/dynamics.hpp"
#include "sigdyn/model.hpp"

namespace sigdyn {

struct DynamicsSpec {
  enum class Builder { emd, timeofday, file };
  Builder builder = Builder::emd;
  MetricKind metric = MetricKind::wasserstein;
  double psi = 0.5;
  std::vector<std::size_t> blocks;
  std::string path;
  std::size_t max_states = kDefaultMaxStates;
  bool force_lp = false;
};

struct InitialPopulation {
  enum class Mode { stationary, uniform, fixed };
  Mode mode = Mode::stationary;
  std::size_t index = 0;  // fixed
};

struct Scenario {
  std::vector<CostFunction> costs;
  std::vector<std::optional<double>> kappa;  // per resource
  PolicySet omegas{{Rational{0, 1}}};
  Count agents = 1;
  SmoothingParams q;
  DynamicsSpec dynamics;

  std::size_t horizon = 100;
  std::size_t paths = 10'000;
  std::uint64_t master_seed = 0;
  std::vector<std::size_t> probes{25, 50, 100};
  std::optional<Signal> initial_signal;
  InitialPopulation initial_population;
  bool retain_full = false;
  unsigned threads = 1;

  // Certificate options.
  bool refine_per_population = false;
  double convergence_threshold = 0.1;
  std::size_t empirical_trials = 200;

  std::size_t resources() const noexcept { return costs.size(); }
};

/// Builds the transition matrix the scenario describes (reads it for the
/// file builder) and checks its dimension against K.
TransitionMatrix build_dynamics(const Scenario& s, const PopulationIndex& index);

struct TrajectoryStep {
  Signal signal;
  CongestionProfile profile;
  std::size_t population = 0;
  double social_cost = 0.0;
};

/// One sample path, entry t−1 holding time step t.
using Trajectory = std::vector<TrajectoryStep>;

struct MomentSeries {
  std::vector<double> mean;
  std::vector<double> stddev;  // population standard deviation over paths
};

struct ProbeSamples {
  std::size_t t = 0;
  std::vector<std::vector<double>> counts;  // [resource][path]
  std::vector<double> social_cost;          // [path]
};

struct Ensemble {
  std::size_t paths = 0;
  std::size_t horizon = 0;
  std::vector<MomentSeries> counts;  // per resource, indexed by t−1
  MomentSeries social_cost;
  std::vector<ProbeSamples> probes;  // sorted by t

  const ProbeSamples* probe(std::size_t t) const;
};

/// A scenario together with its population index and transition matrix.
class Simulation {
 public:
  explicit Simulation(Scenario scenario);
  Simulation(Scenario scenario, TransitionMatrix matrix);

  const Scenario& scenario() const noexcept { return scenario_; }
  const PopulationIndex& index() const noexcept { return index_; }
  const TransitionMatrix& matrix() const noexcept { return matrix_; }
  /// Distribution the first population is drawn from.
  const std::vector<double>& initial_distribution() const noexcept { return initial_; }

  /// Deterministic in (scenario, path_id). Draw 0 of the path's stream picks
  /// the initial population; draw t−1 picks the population at step t.
  Trajectory run_path(std::uint64_t path_id) const;

  /// Aggregates paths 0..paths−1. Paths are grouped into fixed blocks whose
  /// partial moments are merged in block order, so the result does not
  /// depend on `threads`.
  Ensemble run_ensemble(std::size_t paths, unsigned threads = 1) const;

 private:
  void prepare();

  Scenario scenario_;
  PopulationIndex index_;
  TransitionMatrix matrix_;
  TransitionSampler sampler_;
  std::vector<double> initial_;
  Signal start_signal_;
};

struct GridOptimum {
  double fraction = 0.0;
  double value = 0.0;
};

/// Minimizes C(x) = x·c₁(x) + (1−x)·c₂(1−x) over x ∈ {0, r, 2r, …} ∩ [0,1].
GridOptimum grid_optimum(std::span<const CostFunction> costs, double resolution);

}  // namespace sigdyn
