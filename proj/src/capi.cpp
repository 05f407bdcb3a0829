// Copyright 2026 The sigdyn Authors
// SPDX-License-Identifier: Apache-2.0

#include "sigdyn/sigdyn.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "sigdyn/commands.hpp"
#include "sigdyn/error.hpp"
#include "sigdyn/transport.hpp"

struct sigdyn_scenario {
  sigdyn::Scenario scenario;
};

namespace {

thread_local std::string g_last_error;

sigdyn_status set_error(sigdyn_status status, const char* what) {
  g_last_error = what;
  return status;
}

template <class F>
sigdyn_status guarded(F&& f) {
  g_last_error.clear();
  try {
    f();
    return SIGDYN_OK;
  } catch (const sigdyn::Error& e) {
    return set_error(static_cast<sigdyn_status>(static_cast<int>(e.kind())), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(SIGDYN_ERROR_CAPACITY, "out of memory");
  } catch (const std::exception& e) {
    return set_error(SIGDYN_ERROR_RUNTIME, e.what());
  } catch (...) {
    return set_error(SIGDYN_ERROR_RUNTIME, "unknown error");
  }
}

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require_arg(const void* p, const char* name) {
  if (!p) sigdyn::fail_validation(std::string(name) + " must not be NULL");
}

}  // namespace

extern "C" {

const char* sigdyn_version(void) { return "1.0.0"; }

const char* sigdyn_last_error(void) { return g_last_error.c_str(); }

void sigdyn_string_free(char* s) { std::free(s); }

sigdyn_status sigdyn_scenario_load(const char* path, sigdyn_scenario** out) {
  return guarded([&] {
    require_arg(path, "path");
    require_arg(out, "out");
    *out = nullptr;
    auto* h = new sigdyn_scenario{sigdyn::load_scenario(path)};
    *out = h;
  });
}

sigdyn_status sigdyn_scenario_parse(const char* json_text, const char* base_dir,
                                    sigdyn_scenario** out) {
  return guarded([&] {
    require_arg(json_text, "json_text");
    require_arg(out, "out");
    *out = nullptr;
    auto* h = new sigdyn_scenario{
        sigdyn::parse_scenario(json_text, base_dir ? std::filesystem::path(base_dir)
                                                   : std::filesystem::path())};
    *out = h;
  });
}

void sigdyn_scenario_free(sigdyn_scenario* scenario) { delete scenario; }

sigdyn_status sigdyn_scenario_set_seed(sigdyn_scenario* scenario, uint64_t seed) {
  return guarded([&] {
    require_arg(scenario, "scenario");
    scenario->scenario.master_seed = seed;
  });
}

sigdyn_status sigdyn_scenario_set_threads(sigdyn_scenario* scenario, unsigned threads) {
  return guarded([&] {
    require_arg(scenario, "scenario");
    if (threads < 1) sigdyn::fail_validation("threads must be >= 1");
    scenario->scenario.threads = threads;
  });
}

sigdyn_status sigdyn_scenario_set_paths(sigdyn_scenario* scenario, uint64_t paths) {
  return guarded([&] {
    require_arg(scenario, "scenario");
    if (paths < 1) sigdyn::fail_validation("paths must be >= 1");
    scenario->scenario.paths = paths;
  });
}

sigdyn_status sigdyn_enumerate(const sigdyn_scenario* scenario, const char* csv_path,
                               uint64_t* states) {
  return guarded([&] {
    require_arg(scenario, "scenario");
    std::optional<std::filesystem::path> out;
    if (csv_path) out = csv_path;
    const auto k = sigdyn::commands::enumerate(scenario->scenario, out);
    if (states) *states = k;
  });
}

sigdyn_status sigdyn_build_matrix(const sigdyn_scenario* scenario, const char* out_path,
                                  uint64_t* states, uint64_t* distance_computations) {
  return guarded([&] {
    require_arg(scenario, "scenario");
    require_arg(out_path, "out_path");
    const auto summary = sigdyn::commands::build_matrix(scenario->scenario, out_path);
    if (states) *states = summary.states;
    if (distance_computations) *distance_computations = summary.distance_computations;
  });
}

sigdyn_status sigdyn_certify(const sigdyn_scenario* scenario, char** report_json) {
  return guarded([&] {
    require_arg(scenario, "scenario");
    require_arg(report_json, "report_json");
    *report_json = nullptr;
    *report_json = duplicate(sigdyn::commands::certify(scenario->scenario));
  });
}

sigdyn_status sigdyn_simulate(const sigdyn_scenario* scenario, const char* out_dir,
                              uint64_t dump_trajectories, char** summary_json) {
  return guarded([&] {
    require_arg(scenario, "scenario");
    require_arg(out_dir, "out_dir");
    if (summary_json) *summary_json = nullptr;
    const auto result = sigdyn::commands::simulate(scenario->scenario, out_dir, dump_trajectories);
    if (summary_json) *summary_json = duplicate(result.summary_json);
  });
}

sigdyn_status sigdyn_optimum(const sigdyn_scenario* scenario, double resolution, double* fraction,
                             double* value) {
  return guarded([&] {
    require_arg(scenario, "scenario");
    const auto best = sigdyn::commands::optimum(scenario->scenario, resolution);
    if (fraction) *fraction = best.fraction;
    if (value) *value = best.value;
  });
}

sigdyn_status sigdyn_emd(const int64_t* eta, const int64_t* gamma, const double* omegas,
                         size_t policies, sigdyn_metric metric, double* distance) {
  return guarded([&] {
    require_arg(eta, "eta");
    require_arg(gamma, "gamma");
    require_arg(omegas, "omegas");
    require_arg(distance, "distance");
    if (metric != SIGDYN_METRIC_SUBSTITUTION && metric != SIGDYN_METRIC_WASSERSTEIN)
      sigdyn::fail_validation("unknown metric");
    std::vector<sigdyn::Rational> w;
    for (size_t i = 0; i < policies; ++i) w.push_back(sigdyn::Rational::from_double(omegas[i]));
    const sigdyn::PolicySet set(std::move(w));
    const sigdyn::Population a{{eta, eta + policies}}, b{{gamma, gamma + policies}};
    const auto kind = metric == SIGDYN_METRIC_SUBSTITUTION ? sigdyn::MetricKind::substitution
                                                           : sigdyn::MetricKind::wasserstein;
    *distance = sigdyn::emd(a, b, sigdyn::ground_matrix(kind, set)).objective();
  });
}

}  // extern "C"
