// Copyright 2026 The sigdyn Authors
// SPDX-License-Identifier: Apache-2.0

// Stability certificates for the signalling map and convergence diagnostics
// for simulated ensembles.

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "sigdyn/dynamics.hpp"
#include "sigdyn/model.hpp"
#include "sigdyn/sim.hpp"

namespace sigdyn {

/// max{q2, 1+q1−q2}: the contraction factor of the smoothing recursion alone.
double smoothing_factor(const SmoothingParams& q);

/// Σ_m L_m κ_m
double lipschitz_kappa_sum(std::span<const double> lipschitz, std::span<const double> kappa);

/// L̄ = max{q2, 1+q1−q2} + (2−q1−q2)·N·Σ L_m κ_m, an upper bound on the
/// Lipschitz constant (1-norm) of the one-step signal map for any population.
double lipschitz_bound(const SmoothingParams& q, Count agents,
                       std::span<const double> lipschitz, std::span<const double> kappa);

/// True iff 1 − max{q2, 1+q1−q2} > 0, i.e. q2 > q1 and q2 < 1.
bool q_condition(const SmoothingParams& q);

/// κ′_m = κ_m·M·N(2−q1−q2)/(1 − max{q2, 1+q1−q2}). Requires q_condition.
std::vector<double> kappa_budget(const SmoothingParams& q, Count agents, std::size_t resources,
                                 std::span<const double> kappa);

struct ContractivityReport {
  std::vector<double> bounds;      // L̄_j per population
  std::vector<double> stationary;  // m
  double average_log = 0.0;        // Σ m(j) log L̄_j
  bool certified = false;
  bool q_condition = false;
  double kappa_sum = 0.0;          // left side of the sufficient condition
  double kappa_limit = 0.0;        // (1 − max{q2,1+q1−q2}) / (N(2−q1−q2))
  bool kappa_condition = false;    // kappa_sum < kappa_limit
  std::vector<double> kappa_prime; // empty unless q_condition
  bool refined = false;
};

struct CertifyOptions {
  /// Replace N by max_ω η_j(ω) in the per-population bound.
  bool refine_per_population = false;
};

ContractivityReport certify(const TransitionMatrix& p, const PopulationIndex& index,
                            const SmoothingParams& q, std::span<const double> lipschitz,
                            std::span<const double> kappa, const CertifyOptions& options = {});

/// Largest observed ‖w(x) − w(y)‖₁ / ‖x − y‖₁ for the one-step signal map w
/// of population `pop`, over `trials` random signal pairs with coordinates in
/// [0, signal_scale). Trial k uses draws depending only on (seed, k), so
/// extending `trials` never lowers the result.
double empirical_lipschitz(const PolicySet& omegas, std::span<const CostFunction> costs,
                           const SmoothingParams& q, const Population& pop, std::size_t trials,
                           std::uint64_t seed, double signal_scale);

/// Scenario form: signal coordinates range over [0, 2·max cost on the load grid).
double empirical_lipschitz(const Scenario& scenario, const Population& pop, std::size_t trials,
                           std::uint64_t seed);

/// (1/n)·Σ|a_(i) − b_(i)| over sorted samples of equal size.
double wasserstein_1d_samples(std::span<const double> a, std::span<const double> b);

/// Distances between the cross-path samples of n^resource at consecutive
/// requested probe times.
std::vector<double> convergence_diagnostic(const Ensemble& ensemble, std::size_t resource,
                                           std::span<const std::size_t> times);

}  // namespace sigdyn
