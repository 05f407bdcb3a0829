// Copyright 2026 The sigdyn Authors
// SPDX-License-Identifier: Apache-2.0

// One time step of the signalling loop: cost evaluation, exponential
// smoothing of the broadcast signal, per-policy resource choice and demand
// aggregation.
//
// Resources and policies are 0-based throughout the library. Costs are
// evaluated at the load fraction n/N of the resource.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sigdyn/cost_expr.hpp"

namespace sigdyn {

using Count = std::int64_t;

struct CostFunction {
  CostExpr form;
  std::optional<double> lipschitz;  // w.r.t. the load argument
};

/// Exact rational number with positive denominator, kept in lowest terms.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational make(std::int64_t num, std::int64_t den);
  /// Recovers the rational with smallest denominator (≤ 10^6) that rounds to
  /// `v`; fails with a validation error when none exists.
  static Rational from_double(double v);
  /// Accepts "p/q", integers and decimals.
  static Rational parse(const std::string& text);

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

/// The policy weights Ω: strictly increasing rationals in [0, 1].
class PolicySet {
 public:
  explicit PolicySet(std::vector<Rational> omegas);

  std::size_t size() const noexcept { return omegas_.size(); }
  const std::vector<Rational>& rationals() const noexcept { return omegas_; }
  const std::vector<double>& values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  /// Least common multiple of all denominators.
  std::int64_t common_denominator() const noexcept { return lcd_; }

 private:
  std::vector<Rational> omegas_;
  std::vector<double> values_;
  std::int64_t lcd_ = 1;
};

/// Integer histogram of agents over the policies.
struct Population {
  std::vector<Count> counts;

  Count total() const;
  friend bool operator==(const Population&, const Population&) = default;
  friend auto operator<=>(const Population&, const Population&) = default;
};

/// Agent counts per resource.
struct CongestionProfile {
  std::vector<Count> counts;

  Count total() const;
  friend bool operator==(const CongestionProfile&, const CongestionProfile&) = default;
};

/// Broadcast signal: smoothed cost `u` and smoothed absolute deviation `v`
/// per resource. Flattened it is the 2M-vector (u¹ v¹ u² v² ...).
struct Signal {
  std::vector<double> u;
  std::vector<double> v;

  std::size_t resources() const noexcept { return u.size(); }
  std::vector<double> flatten() const;
  friend bool operator==(const Signal&, const Signal&) = default;
};

struct SmoothingParams {
  double q1 = 0.0;
  double q2 = 0.0;

  /// Validates 0 ≤ q ≤ 1 for both coefficients. q = 1 is the frozen limit in
  /// which the corresponding signal component never moves.
  static SmoothingParams make(double q1, double q2);
};

double eval_cost(const CostFunction& c, Count n, Count total, std::size_t resource = 0);

Signal update_signal(const Signal& prev, const CongestionProfile& profile_prev,
                     std::span<const CostFunction> costs, const SmoothingParams& q);

/// argmin_m ω·u^m + (1−ω)·v^m, lowest index on ties.
std::size_t choose_resource(double omega, const Signal& s);

CongestionProfile aggregate_demand(const PolicySet& omegas, const Population& pop,
                                   const Signal& s);

struct StepResult {
  Signal signal;
  CongestionProfile profile;
};

/// update_signal followed by aggregate_demand under the next population.
StepResult step(const Signal& s, const CongestionProfile& profile,
                const PolicySet& omegas, const Population& pop_next,
                std::span<const CostFunction> costs, const SmoothingParams& q);

double social_cost(const CongestionProfile& profile, std::span<const CostFunction> costs);

/// Neutral starting signal: u^m is the cost under the uniform split N/M
/// (remainder to the lowest indices), v^m = 0.
Signal initial_signal(std::span<const CostFunction> costs, Count total);

/// Uniform split of `total` agents over `resources`, remainder to lowest indices.
CongestionProfile uniform_profile(std::size_t resources, Count total);

}  // namespace sigdyn
