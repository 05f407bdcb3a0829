// Copyright 2026 The sigdyn Authors
// SPDX-License-Identifier: Apache-2.0

// Population-space Markov chain: enumeration of all populations, transition
// matrix builders, stationary distributions and sampling.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sigdyn/model.hpp"
#include "sigdyn/transport.hpp"

namespace sigdyn {

inline constexpr std::size_t kDefaultMaxStates = 10'000;

/// C(policies + agents − 1, agents), or nullopt if it exceeds `limit`.
std::optional<std::size_t> population_count(std::size_t policies, Count agents,
                                            std::size_t limit);

/// All populations of `agents` over `policies` in ascending lexicographic
/// order of their count tuples.
class PopulationIndex {
 public:
  PopulationIndex(std::size_t policies, Count agents,
                  std::size_t max_states = kDefaultMaxStates);

  std::size_t size() const noexcept { return pops_.size(); }
  std::size_t policies() const noexcept { return policies_; }
  Count agents() const noexcept { return agents_; }
  const Population& operator[](std::size_t i) const { return pops_[i]; }
  const std::vector<Population>& populations() const noexcept { return pops_; }
  /// Position of `pop`, or nullopt when it is not a member.
  std::optional<std::size_t> find(const Population& pop) const;

 private:
  std::size_t policies_;
  Count agents_;
  std::vector<Population> pops_;
};

PopulationIndex enumerate_populations(const PolicySet& omegas, Count agents,
                                      std::size_t max_states = kDefaultMaxStates);

/// Provenance of a transition matrix, serialized into the metadata sidecar.
struct MatrixInfo {
  std::string builder;  // "emd", "timeofday", "file", "custom"
  std::optional<MetricKind> metric;
  std::optional<double> psi;
  std::vector<std::size_t> blocks;
  std::vector<Rational> omegas;
  std::optional<Count> agents;
  std::uint64_t distance_computations = 0;
};

/// Dense row-stochastic matrix, row-major.
class TransitionMatrix {
 public:
  TransitionMatrix(std::size_t k, std::vector<double> entries, MatrixInfo info = {});

  std::size_t size() const noexcept { return k_; }
  double operator()(std::size_t i, std::size_t j) const { return p_[i * k_ + j]; }
  std::span<const double> row(std::size_t i) const { return {p_.data() + i * k_, k_}; }
  std::span<const double> entries() const noexcept { return p_; }
  const MatrixInfo& info() const noexcept { return info_; }

  /// Largest |row sum − 1|.
  double max_row_defect() const;

 private:
  std::size_t k_;
  std::vector<double> p_;
  MatrixInfo info_;
};

struct EmdBuildOptions {
  bool use_closed_form = true;  // false forces the transportation solver
  unsigned threads = 1;
};

/// p_ij ∝ ψ^Δ(η_i, η_j), rows normalized. Each unordered pair's distance is
/// computed once; `info().distance_computations` records how many.
TransitionMatrix build_matrix_emd(const PopulationIndex& index, const PolicySet& omegas,
                                  MetricKind metric, double psi,
                                  const EmdBuildOptions& options = {});

/// Block-cyclic matrix: from any state of block ℓ, probability 1/N_{ℓ+1} to
/// each state of block ℓ+1 (the last block wraps to the first).
TransitionMatrix build_matrix_timeofday(std::span<const std::size_t> block_sizes);

/// Closed communicating classes of the support graph, each sorted.
std::vector<std::vector<std::size_t>> closed_classes(const TransitionMatrix& p);

/// Stationary vector m with mᵀP = mᵀ, Σm = 1. Fails with a runtime error
/// listing the closed classes when the stationary vector is not unique.
std::vector<double> stationary(const TransitionMatrix& p);

/// ‖mᵀP − mᵀ‖₁
double stationary_residual(const TransitionMatrix& p, std::span<const double> m);

/// Inverse-CDF draw from row `current` with a single uniform `u` ∈ [0,1).
std::size_t sample_next(const TransitionMatrix& p, std::size_t current, double u);

/// Cumulative rows for repeated O(log K) sampling; agrees with sample_next.
class TransitionSampler {
 public:
  explicit TransitionSampler(const TransitionMatrix& p);
  std::size_t next(std::size_t current, double u) const;
  /// Inverse-CDF draw from an arbitrary probability vector.
  static std::size_t draw(std::span<const double> probabilities, double u);

 private:
  std::size_t k_;
  std::vector<double> cdf_;
  std::vector<std::size_t> last_positive_;
};

}  // namespace sigdyn
