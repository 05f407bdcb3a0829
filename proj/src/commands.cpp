// Copyright 2026 The sigdyn Authors
// SPDX-License-Identifier: Apache-2.0

#include "sigdyn/commands.hpp"

#include <cmath>
#include <json.hpp>

#include "sigdyn/analysis.hpp"
#include "sigdyn/error.hpp"
#include "sigdyn/matrix_io.hpp"

namespace sigdyn::commands {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string rational_text(const Rational& r) {
  return r.den == 1 ? std::to_string(r.num) : std::to_string(r.num) + "/" + std::to_string(r.den);
}

// JSON numbers are emitted in shortest round-trip form by nlohmann::json, so
// identical doubles always serialize identically.
ordered_json finite_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(); }

}  // namespace

std::size_t enumerate(const Scenario& s, const std::optional<fs::path>& csv_out) {
  const PopulationIndex index = enumerate_populations(s.omegas, s.agents, s.dynamics.max_states);
  if (csv_out) {
    std::string out = "index";
    for (std::size_t i = 0; i < s.omegas.size(); ++i) out += ",n" + std::to_string(i + 1);
    out += '\n';
    for (std::size_t j = 0; j < index.size(); ++j) {
      out += std::to_string(j);
      for (Count c : index[j].counts) out += "," + std::to_string(c);
      out += '\n';
    }
    write_file_atomic(*csv_out, out);
  }
  return index.size();
}

BuildSummary build_matrix(const Scenario& s, const fs::path& out) {
  const PopulationIndex index = enumerate_populations(s.omegas, s.agents, s.dynamics.max_states);
  const TransitionMatrix p = build_dynamics(s, index);
  write_matrix(p, out);
  write_matrix_metadata(p, out);
  return {p.size(), p.info().distance_computations, p.max_row_defect()};
}

std::string certify(const Scenario& s) {
  std::vector<double> lipschitz, kappa;
  for (std::size_t m = 0; m < s.resources(); ++m) {
    const std::string key = "resources[" + std::to_string(m) + "]";
    if (!s.costs[m].lipschitz) fail_validation(key + ".lipschitz: is required for certify");
    if (!s.kappa[m]) fail_validation(key + ".kappa: is required for certify");
    lipschitz.push_back(*s.costs[m].lipschitz);
    kappa.push_back(*s.kappa[m]);
  }
  if (!q_condition(s.q))
    fail_validation("smoothing: the contractivity certificate requires q2 > q1 (and q2 < 1); "
                    "with q2 <= q1 the admissible Lipschitz budget is not positive (got q1=" +
                    format_double(s.q.q1) + ", q2=" + format_double(s.q.q2) + ")");

  const PopulationIndex index = enumerate_populations(s.omegas, s.agents, s.dynamics.max_states);
  const TransitionMatrix p = build_dynamics(s, index);
  CertifyOptions opt;
  opt.refine_per_population = s.refine_per_population;
  const ContractivityReport r = sigdyn::certify(p, index, s.q, lipschitz, kappa, opt);

  ordered_json j;
  j["verdict"] = r.certified ? "certified" : "not-certified";
  j["average_log_lipschitz"] = finite_or_null(r.average_log);
  j["q1"] = s.q.q1;
  j["q2"] = s.q.q2;
  j["q_condition"] = r.q_condition;
  j["agents"] = s.agents;
  j["states"] = index.size();
  j["smoothing_factor"] = smoothing_factor(s.q);
  j["uniform_bound"] = lipschitz_bound(s.q, s.agents, lipschitz, kappa);
  j["kappa_condition"] = {{"lhs_sum_lipschitz_kappa", r.kappa_sum},
                          {"rhs_limit", r.kappa_limit},
                          {"satisfied", r.kappa_condition}};
  j["kappa_prime"] = r.kappa_prime;
  j["refined_per_population"] = r.refined;
  j["bounds"] = r.bounds;
  j["stationary"] = r.stationary;
  j["stationary_residual"] = stationary_residual(p, r.stationary);

  // Empirical probe of the true constant, reported next to the bound.
  if (s.empirical_trials > 0) {
    double worst = 0.0;
    for (std::size_t idx = 0; idx < index.size(); ++idx)
      worst = std::max(worst, empirical_lipschitz(s, index[idx], s.empirical_trials, s.master_seed));
    j["empirical_lipschitz_max"] = worst;
    j["empirical_exceeds_bound"] = worst > *std::max_element(r.bounds.begin(), r.bounds.end());
  }
  return j.dump(2) + "\n";
}

SimulateSummary simulate(const Scenario& s, const fs::path& out_dir, std::size_t dump_trajectories) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) fail_runtime("cannot create output directory '" + out_dir.string() + "': " + ec.message());

  const Simulation sim(s);
  const Ensemble ens = sim.run_ensemble(s.paths, s.threads);
  const std::size_t M = s.resources();

  std::string csv = "t";
  for (std::size_t m = 0; m < M; ++m) csv += ",mean_n" + std::to_string(m + 1);
  for (std::size_t m = 0; m < M; ++m) csv += ",std_n" + std::to_string(m + 1);
  csv += ",mean_cost,std_cost\n";
  for (std::size_t t = 0; t < ens.horizon; ++t) {
    csv += std::to_string(t + 1);
    for (std::size_t m = 0; m < M; ++m) csv += "," + format_double(ens.counts[m].mean[t]);
    for (std::size_t m = 0; m < M; ++m) csv += "," + format_double(ens.counts[m].stddev[t]);
    csv += "," + format_double(ens.social_cost.mean[t]) + "," + format_double(ens.social_cost.stddev[t]) + "\n";
  }
  write_file_atomic(out_dir / "ensemble.csv", csv);

  std::string probes = "t,path";
  for (std::size_t m = 0; m < M; ++m) probes += ",n" + std::to_string(m + 1);
  probes += ",cost\n";
  for (const ProbeSamples& p : ens.probes)
    for (std::size_t path = 0; path < ens.paths; ++path) {
      probes += std::to_string(p.t) + "," + std::to_string(path);
      for (std::size_t m = 0; m < M; ++m) probes += "," + std::to_string(static_cast<Count>(p.counts[m][path]));
      probes += "," + format_double(p.social_cost[path]) + "\n";
    }
  write_file_atomic(out_dir / "probes.csv", probes);

  std::vector<std::size_t> times;
  for (const ProbeSamples& p : ens.probes) times.push_back(p.t);
  std::string diag = "resource,t_from,t_to,wasserstein\n";
  ordered_json jdiag = ordered_json::array();
  bool tail_ok = true;
  if (ens.paths >= 2 && times.size() >= 2) {
    for (std::size_t m = 0; m < M; ++m) {
      const auto d = convergence_diagnostic(ens, m, times);
      for (std::size_t k = 0; k < d.size(); ++k) {
        diag += std::to_string(m + 1) + "," + std::to_string(times[k]) + "," +
                std::to_string(times[k + 1]) + "," + format_double(d[k]) + "\n";
        jdiag.push_back({{"resource", m + 1}, {"t_from", times[k]}, {"t_to", times[k + 1]}, {"distance", d[k]}});
      }
      if (!d.empty() && d.back() >= s.convergence_threshold) tail_ok = false;
    }
  }
  write_file_atomic(out_dir / "diagnostics.csv", diag);

  for (std::size_t path = 0; path < dump_trajectories && path < s.paths; ++path) {
    const Trajectory traj = sim.run_path(path);
    std::string out = "t,population";
    for (std::size_t m = 0; m < M; ++m) out += ",u" + std::to_string(m + 1) + ",v" + std::to_string(m + 1);
    for (std::size_t m = 0; m < M; ++m) out += ",n" + std::to_string(m + 1);
    out += ",cost\n";
    for (std::size_t t = 0; t < traj.size(); ++t) {
      const TrajectoryStep& st = traj[t];
      out += std::to_string(t + 1) + "," + std::to_string(st.population);
      for (std::size_t m = 0; m < M; ++m)
        out += "," + format_double(st.signal.u[m]) + "," + format_double(st.signal.v[m]);
      for (std::size_t m = 0; m < M; ++m) out += "," + std::to_string(st.profile.counts[m]);
      out += "," + format_double(st.social_cost) + "\n";
    }
    write_file_atomic(out_dir / ("trajectory_" + std::to_string(path) + ".csv"), out);
  }

  ordered_json j;
  j["paths"] = ens.paths;
  j["horizon"] = ens.horizon;
  j["master_seed"] = s.master_seed;
  j["agents"] = s.agents;
  j["states"] = sim.index().size();
  j["policies"] = ordered_json::array();
  for (const Rational& r : s.omegas.rationals()) j["policies"].push_back(rational_text(r));
  j["dynamics"] = nlohmann::ordered_json::parse(matrix_info_json(sim.matrix().info(), sim.matrix().size()));
  j["probes"] = times;
  j["final_mean_social_cost"] = ens.social_cost.mean.back();
  j["final_std_social_cost"] = ens.social_cost.stddev.back();
  j["final_mean_counts"] = ordered_json::array();
  for (std::size_t m = 0; m < M; ++m) j["final_mean_counts"].push_back(ens.counts[m].mean.back());
  j["convergence"] = {{"threshold", s.convergence_threshold},
                      {"tail_below_threshold", tail_ok},
                      {"distances", jdiag}};
  const std::string summary = j.dump(2) + "\n";
  write_file_atomic(out_dir / "summary.json", summary);
  return {ens.paths, ens.horizon, summary};
}

GridOptimum optimum(const Scenario& s, double resolution) {
  return grid_optimum(s.costs, resolution);
}

}  // namespace sigdyn::commands
