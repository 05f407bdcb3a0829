// Copyright 2026 The sigdyn Authors
// SPDX-License-Identifier: Apache-2.0

#include "sigdyn/scenario.hpp"

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "sigdyn/error.hpp"

namespace sigdyn {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& key, const std::string& constraint) {
  fail_validation(key + ": " + constraint);
}

void allow_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) bad(where, "must be an object");
  std::set<std::string> known(keys.begin(), keys.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!known.count(it.key()))
      bad(where.empty() ? it.key() : where + "." + it.key(), "unknown key");
}

const json& require(const json& obj, const char* name, const std::string& key) {
  auto it = obj.find(name);
  if (it == obj.end()) bad(key, "is required");
  return *it;
}

double as_number(const json& v, const std::string& key) {
  if (!v.is_number()) bad(key, "must be a number");
  return v.get<double>();
}

std::int64_t as_integer(const json& v, const std::string& key) {
  if (!v.is_number_integer()) bad(key, "must be an integer");
  return v.get<std::int64_t>();
}

std::uint64_t as_unsigned(const json& v, const std::string& key) {
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
    bad(key, "must be a nonnegative integer");
  return v.get<std::uint64_t>();
}

bool as_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) bad(key, "must be true or false");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& key) {
  if (!v.is_string()) bad(key, "must be a string");
  return v.get<std::string>();
}

template <class F>
auto rethrow_keyed(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    bad(key, e.what());
  }
}

void parse_resources(const json& arr, Scenario& s) {
  if (!arr.is_array() || arr.empty()) bad("resources", "must be a nonempty array");
  for (std::size_t m = 0; m < arr.size(); ++m) {
    const std::string key = "resources[" + std::to_string(m) + "]";
    const json& r = arr[m];
    allow_keys(r, key, {"cost", "lipschitz", "kappa"});
    const std::string text = as_string(require(r, "cost", key + ".cost"), key + ".cost");
    CostFunction c{rethrow_keyed(key + ".cost", [&] { return CostExpr::parse(text); }), {}};
    if (r.contains("lipschitz")) {
      double l = as_number(r["lipschitz"], key + ".lipschitz");
      if (l < 0.0) bad(key + ".lipschitz", "must be nonnegative");
      c.lipschitz = l;
    }
    std::optional<double> kappa;
    if (r.contains("kappa")) {
      double k = as_number(r["kappa"], key + ".kappa");
      if (k < 0.0) bad(key + ".kappa", "must be nonnegative");
      kappa = k;
    }
    s.costs.push_back(std::move(c));
    s.kappa.push_back(kappa);
  }
}

PolicySet parse_policies(const json& arr) {
  if (!arr.is_array() || arr.empty()) bad("policies", "must be a nonempty array");
  std::vector<Rational> omegas;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string key = "policies[" + std::to_string(i) + "]";
    const json& v = arr[i];
    if (v.is_string())
      omegas.push_back(rethrow_keyed(key, [&] { return Rational::parse(v.get<std::string>()); }));
    else if (v.is_number_integer())
      omegas.push_back(Rational::make(v.get<std::int64_t>(), 1));
    else if (v.is_number())
      omegas.push_back(rethrow_keyed(key, [&] { return Rational::from_double(v.get<double>()); }));
    else
      bad(key, "must be a number or a \"p/q\" string");
  }
  return rethrow_keyed("policies", [&] { return PolicySet(std::move(omegas)); });
}

void parse_dynamics(const json& d, Scenario& s, const std::filesystem::path& base_dir) {
  allow_keys(d, "dynamics", {"builder", "metric", "psi", "blocks", "path", "max_states", "solver"});
  const std::string builder = as_string(require(d, "builder", "dynamics.builder"), "dynamics.builder");
  auto& spec = s.dynamics;
  if (d.contains("max_states")) {
    spec.max_states = as_unsigned(d["max_states"], "dynamics.max_states");
    if (spec.max_states < 1) bad("dynamics.max_states", "must be >= 1");
  }
  if (builder == "emd") {
    spec.builder = DynamicsSpec::Builder::emd;
    spec.metric = rethrow_keyed("dynamics.metric", [&] {
      return metric_from_string(as_string(require(d, "metric", "dynamics.metric"), "dynamics.metric"));
    });
    spec.psi = as_number(require(d, "psi", "dynamics.psi"), "dynamics.psi");
    if (!(spec.psi > 0.0 && spec.psi < 1.0)) bad("dynamics.psi", "must lie in (0,1)");
    if (d.contains("solver")) {
      const std::string solver = as_string(d["solver"], "dynamics.solver");
      if (solver == "lp")
        spec.force_lp = true;
      else if (solver != "closed_form")
        bad("dynamics.solver", "must be \"closed_form\" or \"lp\"");
    }
  } else if (builder == "timeofday") {
    spec.builder = DynamicsSpec::Builder::timeofday;
    const json& blocks = require(d, "blocks", "dynamics.blocks");
    if (!blocks.is_array() || blocks.empty()) bad("dynamics.blocks", "must be a nonempty array");
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      const std::string key = "dynamics.blocks[" + std::to_string(i) + "]";
      auto b = as_unsigned(blocks[i], key);
      if (b < 1) bad(key, "must be a positive integer");
      spec.blocks.push_back(b);
    }
  } else if (builder == "file") {
    spec.builder = DynamicsSpec::Builder::file;
    std::filesystem::path p = as_string(require(d, "path", "dynamics.path"), "dynamics.path");
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    spec.path = p.string();
  } else {
    bad("dynamics.builder", "must be one of emd, timeofday, file");
  }
}

void parse_simulation(const json& sim, Scenario& s) {
  allow_keys(sim, "simulation", {"horizon", "paths", "master_seed", "probes", "initial_population",
                                 "initial_signal", "retain_full", "threads"});
  if (sim.contains("horizon")) {
    s.horizon = as_unsigned(sim["horizon"], "simulation.horizon");
    if (s.horizon < 1) bad("simulation.horizon", "must be >= 1");
  }
  if (sim.contains("paths")) {
    s.paths = as_unsigned(sim["paths"], "simulation.paths");
    if (s.paths < 1) bad("simulation.paths", "must be >= 1");
  }
  if (sim.contains("master_seed")) s.master_seed = as_unsigned(sim["master_seed"], "simulation.master_seed");
  if (sim.contains("probes")) {
    const json& probes = sim["probes"];
    if (!probes.is_array()) bad("simulation.probes", "must be an array");
    s.probes.clear();
    for (std::size_t i = 0; i < probes.size(); ++i) {
      const std::string key = "simulation.probes[" + std::to_string(i) + "]";
      auto t = as_unsigned(probes[i], key);
      if (t < 1 || t > s.horizon) bad(key, "must lie in [1, horizon]");
      if (!s.probes.empty() && t <= s.probes.back()) bad(key, "probes must be strictly increasing");
      s.probes.push_back(t);
    }
  } else {
    std::vector<std::size_t> kept;
    for (std::size_t t : s.probes)
      if (t <= s.horizon) kept.push_back(t);
    if (kept.empty() || kept.back() != s.horizon) kept.push_back(s.horizon);
    s.probes = kept;
  }
  if (sim.contains("initial_population")) {
    const json& ip = sim["initial_population"];
    const std::string key = "simulation.initial_population";
    if (ip.is_string()) {
      const std::string mode = ip.get<std::string>();
      if (mode == "stationary")
        s.initial_population.mode = InitialPopulation::Mode::stationary;
      else if (mode == "uniform")
        s.initial_population.mode = InitialPopulation::Mode::uniform;
      else
        bad(key, "must be \"stationary\", \"uniform\", {\"index\": i} or {\"counts\": [...]}");
    } else if (ip.is_object() && ip.contains("index")) {
      allow_keys(ip, key, {"index"});
      s.initial_population.mode = InitialPopulation::Mode::fixed;
      s.initial_population.index = as_unsigned(ip["index"], key + ".index");
    } else if (ip.is_object() && ip.contains("counts")) {
      allow_keys(ip, key, {"counts"});
      const json& counts = ip["counts"];
      if (!counts.is_array() || counts.size() != s.omegas.size())
        bad(key + ".counts", "must list one count per policy");
      Population pop;
      for (std::size_t i = 0; i < counts.size(); ++i)
        pop.counts.push_back(static_cast<Count>(as_unsigned(counts[i], key + ".counts[" + std::to_string(i) + "]")));
      if (pop.total() != s.agents) bad(key + ".counts", "must sum to agents");
      // Lexicographic rank of the composition.
      PopulationIndex idx(s.omegas.size(), s.agents, s.dynamics.max_states);
      s.initial_population.mode = InitialPopulation::Mode::fixed;
      s.initial_population.index = *idx.find(pop);
    } else {
      bad(key, "must be \"stationary\", \"uniform\", {\"index\": i} or {\"counts\": [...]}");
    }
  }
  if (sim.contains("initial_signal")) {
    const json& is = sim["initial_signal"];
    allow_keys(is, "simulation.initial_signal", {"u", "v"});
    Signal sig;
    for (const char* part : {"u", "v"}) {
      const std::string key = std::string("simulation.initial_signal.") + part;
      const json& arr = require(is, part, key);
      if (!arr.is_array() || arr.size() != s.costs.size()) bad(key, "must list one value per resource");
      auto& dst = part[0] == 'u' ? sig.u : sig.v;
      for (std::size_t m = 0; m < arr.size(); ++m) {
        double x = as_number(arr[m], key + "[" + std::to_string(m) + "]");
        if (x < 0.0) bad(key + "[" + std::to_string(m) + "]", "must be nonnegative");
        dst.push_back(x);
      }
    }
    s.initial_signal = std::move(sig);
  }
  if (sim.contains("retain_full")) s.retain_full = as_bool(sim["retain_full"], "simulation.retain_full");
  if (sim.contains("threads")) {
    s.threads = static_cast<unsigned>(as_unsigned(sim["threads"], "simulation.threads"));
    if (s.threads < 1) bad("simulation.threads", "must be >= 1");
  }
}

void parse_analysis(const json& a, Scenario& s) {
  allow_keys(a, "analysis", {"refine_per_population", "convergence_threshold", "empirical_trials"});
  if (a.contains("refine_per_population"))
    s.refine_per_population = as_bool(a["refine_per_population"], "analysis.refine_per_population");
  if (a.contains("convergence_threshold")) {
    s.convergence_threshold = as_number(a["convergence_threshold"], "analysis.convergence_threshold");
    if (s.convergence_threshold < 0.0) bad("analysis.convergence_threshold", "must be nonnegative");
  }
  if (a.contains("empirical_trials"))
    s.empirical_trials = as_unsigned(a["empirical_trials"], "analysis.empirical_trials");
}

}  // namespace

Scenario parse_scenario(std::string_view json_text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    fail_validation(std::string("scenario is not valid JSON: ") + e.what());
  }
  allow_keys(root, "", {"resources", "policies", "agents", "smoothing", "dynamics", "simulation", "analysis"});
  Scenario s;
  parse_resources(require(root, "resources", "resources"), s);
  s.omegas = parse_policies(require(root, "policies", "policies"));
  s.agents = as_integer(require(root, "agents", "agents"), "agents");
  if (s.agents < 1) bad("agents", "must be >= 1");

  const json& sm = require(root, "smoothing", "smoothing");
  allow_keys(sm, "smoothing", {"q1", "q2"});
  const double q1 = as_number(require(sm, "q1", "smoothing.q1"), "smoothing.q1");
  const double q2 = as_number(require(sm, "q2", "smoothing.q2"), "smoothing.q2");
  if (!(q1 >= 0.0 && q1 <= 1.0)) bad("smoothing.q1", "must lie in [0,1]");
  if (!(q2 >= 0.0 && q2 <= 1.0)) bad("smoothing.q2", "must lie in [0,1]");
  s.q = SmoothingParams{q1, q2};

  parse_dynamics(require(root, "dynamics", "dynamics"), s, base_dir);
  if (root.contains("simulation")) {
    parse_simulation(root["simulation"], s);
  } else {
    std::vector<std::size_t> kept;
    for (std::size_t t : s.probes)
      if (t <= s.horizon) kept.push_back(t);
    s.probes = kept;
  }
  if (root.contains("analysis")) parse_analysis(root["analysis"], s);

  // K must fit under the cap before anything else tries to enumerate.
  const auto k = population_count(s.omegas.size(), s.agents, s.dynamics.max_states);
  if (!k) PopulationIndex(s.omegas.size(), s.agents, s.dynamics.max_states);
  if (s.initial_population.mode == InitialPopulation::Mode::fixed && s.initial_population.index >= *k)
    bad("simulation.initial_population.index", "must be below K = " + std::to_string(*k));
  if (s.dynamics.builder == DynamicsSpec::Builder::timeofday) {
    std::size_t states = 0;
    for (std::size_t b : s.dynamics.blocks) states += b;
    if (states != *k)
      bad("dynamics.blocks", "sum to " + std::to_string(states) + " states but K = " + std::to_string(*k));
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_validation("cannot read scenario file '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return parse_scenario(os.str(), path.parent_path());
}

}  // namespace sigdyn
