// Copyright 2026 The sigdyn Authors
// SPDX-License-Identifier: Apache-2.0

// Earth Mover's Distance between integer populations.
//
// Ground costs are held as integers together with a common scale, so that
// H = cost / scale exactly. The transportation problem is then solved in
// exact integer arithmetic by successive shortest paths.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sigdyn/model.hpp"

namespace sigdyn {

enum class MetricKind { substitution, wasserstein };

const char* to_string(MetricKind kind);
MetricKind metric_from_string(const std::string& name);

/// Symmetric ground matrix with zero diagonal, stored as integers over a
/// common positive scale.
class GroundMatrix {
 public:
  GroundMatrix(std::size_t n, std::vector<std::int64_t> scaled, std::int64_t scale);

  std::size_t size() const noexcept { return n_; }
  std::int64_t scale() const noexcept { return scale_; }
  std::int64_t scaled(std::size_t i, std::size_t j) const { return cost_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const {
    return static_cast<double>(scaled(i, j)) / static_cast<double>(scale_);
  }
  std::span<const std::int64_t> scaled_entries() const noexcept { return cost_; }

 private:
  std::size_t n_;
  std::vector<std::int64_t> cost_;
  std::int64_t scale_;
};

GroundMatrix ground_matrix(MetricKind metric, const PolicySet& omegas);

struct TransportPlan {
  std::size_t n = 0;
  std::vector<Count> flows;  // row-major n×n, flows[i*n+j] agents from i to j
  std::int64_t scaled_objective = 0;
  std::int64_t scale = 1;

  Count flow(std::size_t i, std::size_t j) const { return flows[i * n + j]; }
  double objective() const {
    return static_cast<double>(scaled_objective) / static_cast<double>(scale);
  }
};

/// Exact optimum of the transportation problem moving `eta` onto `gamma`.
TransportPlan emd(const Population& eta, const Population& gamma, const GroundMatrix& h);

/// Σ_i max(η_i − γ_i, 0): the EMD under the substitution metric.
Count emd_substitution_closed(const Population& eta, const Population& gamma);

/// Scaled 1-D Wasserstein distance Σ_i |cum_i(η − γ)|·(ω_{i+1} − ω_i)·D,
/// with D the common denominator of Ω. Returned as an integer in units 1/D.
std::int64_t emd_wasserstein_1d_scaled(const Population& eta, const Population& gamma,
                                       const PolicySet& omegas);
double emd_wasserstein_1d(const Population& eta, const Population& gamma,
                          const PolicySet& omegas);

/// Distance under `metric`, using the closed form when `use_closed_form`
/// and the transportation solver otherwise.
double population_distance(const Population& eta, const Population& gamma,
                           MetricKind metric, const PolicySet& omegas,
                           const GroundMatrix& h, bool use_closed_form);

}  // namespace sigdyn
