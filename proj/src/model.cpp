// Copyright 2026 The sigdyn Authors
// SPDX-License-Identifier: Apache-2.0

#include "sigdyn/model.hpp"

#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include "sigdyn/error.hpp"

namespace sigdyn {

Rational Rational::make(std::int64_t num, std::int64_t den) {
  if (den == 0) fail_validation("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  std::int64_t g = std::gcd(num, den);
  if (g == 0) g = 1;
  return Rational{num / g, den / g};
}

Rational Rational::from_double(double v) {
  if (!std::isfinite(v)) fail_validation("non-finite policy value");
  // Continued-fraction convergents h/k of v.
  constexpr std::int64_t kMaxDen = 1'000'000;
  double rest = v;
  std::int64_t h_prev = 1, h = static_cast<std::int64_t>(std::floor(rest));
  std::int64_t k_prev = 0, k = 1;
  for (int iter = 0; iter < 64; ++iter) {
    if (static_cast<double>(h) / static_cast<double>(k) == v) return make(h, k);
    double frac = rest - std::floor(rest);
    if (frac == 0.0) break;
    rest = 1.0 / frac;
    auto a = static_cast<std::int64_t>(std::floor(rest));
    std::int64_t h_next = a * h + h_prev;
    std::int64_t k_next = a * k + k_prev;
    if (k_next > kMaxDen) break;
    h_prev = h;
    k_prev = k;
    h = h_next;
    k = k_next;
  }
  std::ostringstream os;
  os.precision(17);
  os << "value " << v << " is not a rational with denominator <= " << kMaxDen
     << "; write it as \"p/q\"";
  fail_validation(os.str());
}

Rational Rational::parse(const std::string& text) {
  auto slash = text.find('/');
  auto parse_int = [&](std::string_view s) {
    std::int64_t out = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || ptr != s.data() + s.size())
      fail_validation("malformed rational '" + text + "'");
    return out;
  };
  std::string_view sv(text);
  if (slash != std::string::npos)
    return make(parse_int(sv.substr(0, slash)), parse_int(sv.substr(slash + 1)));
  auto dot = text.find('.');
  if (dot == std::string::npos) return make(parse_int(sv), 1);
  std::string digits = text.substr(0, dot) + text.substr(dot + 1);
  std::size_t decimals = text.size() - dot - 1;
  if (decimals > 15) fail_validation("too many decimals in '" + text + "'");
  std::int64_t den = 1;
  for (std::size_t i = 0; i < decimals; ++i) den *= 10;
  return make(parse_int(digits), den);
}

PolicySet::PolicySet(std::vector<Rational> omegas) : omegas_(std::move(omegas)) {
  if (omegas_.empty()) fail_validation("policy set must not be empty");
  values_.reserve(omegas_.size());
  for (std::size_t i = 0; i < omegas_.size(); ++i) {
    const Rational& r = omegas_[i];
    if (r.num < 0 || r.num > r.den)
      fail_validation("policy weight " + std::to_string(r.num) + "/" +
                      std::to_string(r.den) + " outside [0,1]");
    if (i > 0 && r.num * omegas_[i - 1].den <= omegas_[i - 1].num * r.den)
      fail_validation("policy weights must be strictly increasing");
    values_.push_back(r.value());
    lcd_ = std::lcm(lcd_, r.den);
  }
}

Count Population::total() const { return std::accumulate(counts.begin(), counts.end(), Count{0}); }

Count CongestionProfile::total() const {
  return std::accumulate(counts.begin(), counts.end(), Count{0});
}

std::vector<double> Signal::flatten() const {
  std::vector<double> out;
  out.reserve(2 * u.size());
  for (std::size_t m = 0; m < u.size(); ++m) {
    out.push_back(u[m]);
    out.push_back(v[m]);
  }
  return out;
}

SmoothingParams SmoothingParams::make(double q1, double q2) {
  if (!(q1 >= 0.0 && q1 <= 1.0)) fail_validation("smoothing.q1 must lie in [0,1]");
  if (!(q2 >= 0.0 && q2 <= 1.0)) fail_validation("smoothing.q2 must lie in [0,1]");
  return SmoothingParams{q1, q2};
}

double eval_cost(const CostFunction& c, Count n, Count total, std::size_t resource) {
  if (total < 1 || n < 0 || n > total)
    fail_validation("eval_cost: require 0 <= n <= N and N >= 1 (n=" + std::to_string(n) +
                    ", N=" + std::to_string(total) + ")");
  double x = static_cast<double>(n) / static_cast<double>(total);
  double value = c.form(x);
  if (!std::isfinite(value) || value < 0.0) {
    std::ostringstream os;
    os << "cost of resource " << resource << " ('" << c.form.text() << "') at x=" << x
       << " evaluates to " << value << "; costs must be finite and nonnegative";
    fail_runtime(os.str());
  }
  return value;
}

Signal update_signal(const Signal& prev, const CongestionProfile& profile_prev,
                     std::span<const CostFunction> costs, const SmoothingParams& q) {
  const std::size_t M = costs.size();
  if (prev.u.size() != M || prev.v.size() != M || profile_prev.counts.size() != M)
    fail_validation("update_signal: signal/profile size does not match resource count");
  const Count total = profile_prev.total();
  Signal next;
  next.u.resize(M);
  next.v.resize(M);
  for (std::size_t m = 0; m < M; ++m) {
    double c = eval_cost(costs[m], profile_prev.counts[m], total, m);
    next.u[m] = q.q1 * prev.u[m] + (1.0 - q.q1) * c;
    next.v[m] = q.q2 * prev.v[m] + (1.0 - q.q2) * std::abs(c - prev.u[m]);
  }
  return next;
}

std::size_t choose_resource(double omega, const Signal& s) {
  std::size_t best = 0;
  double best_score = omega * s.u[0] + (1.0 - omega) * s.v[0];
  for (std::size_t m = 1; m < s.u.size(); ++m) {
    double score = omega * s.u[m] + (1.0 - omega) * s.v[m];
    if (score < best_score) {
      best_score = score;
      best = m;
    }
  }
  return best;
}

CongestionProfile aggregate_demand(const PolicySet& omegas, const Population& pop,
                                   const Signal& s) {
  if (pop.counts.size() != omegas.size())
    fail_validation("aggregate_demand: population length differs from policy count");
  CongestionProfile out;
  out.counts.assign(s.resources(), 0);
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    if (pop.counts[i] == 0) continue;
    out.counts[choose_resource(omegas[i], s)] += pop.counts[i];
  }
  return out;
}

StepResult step(const Signal& s, const CongestionProfile& profile,
                const PolicySet& omegas, const Population& pop_next,
                std::span<const CostFunction> costs, const SmoothingParams& q) {
  StepResult r;
  r.signal = update_signal(s, profile, costs, q);
  r.profile = aggregate_demand(omegas, pop_next, r.signal);
  return r;
}

double social_cost(const CongestionProfile& profile, std::span<const CostFunction> costs) {
  const Count total = profile.total();
  double sum = 0.0;
  for (std::size_t m = 0; m < costs.size(); ++m) {
    const Count n = profile.counts[m];
    sum += static_cast<double>(n) / static_cast<double>(total) * eval_cost(costs[m], n, total, m);
  }
  return sum;
}

CongestionProfile uniform_profile(std::size_t resources, Count total) {
  CongestionProfile p;
  const Count share = total / static_cast<Count>(resources);
  const Count extra = total % static_cast<Count>(resources);
  p.counts.assign(resources, share);
  for (Count m = 0; m < extra; ++m) p.counts[static_cast<std::size_t>(m)] += 1;
  return p;
}

Signal initial_signal(std::span<const CostFunction> costs, Count total) {
  const CongestionProfile split = uniform_profile(costs.size(), total);
  Signal s;
  s.u.resize(costs.size());
  s.v.assign(costs.size(), 0.0);
  for (std::size_t m = 0; m < costs.size(); ++m)
    s.u[m] = eval_cost(costs[m], split.counts[m], total, m);
  return s;
}

}  // namespace sigdyn
