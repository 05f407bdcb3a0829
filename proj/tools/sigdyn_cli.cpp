// Copyright 2026 The sigdyn Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Talks to the library only through the C API.
//
// Exit codes: 0 success, 1 validation, 2 runtime/numeric, 3 capacity.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "sigdyn/sigdyn.h"

namespace {

struct ScenarioHandle {
  sigdyn_scenario* ptr = nullptr;
  ~ScenarioHandle() { sigdyn_scenario_free(ptr); }
};

struct OwnedString {
  char* ptr = nullptr;
  ~OwnedString() { sigdyn_string_free(ptr); }
};

int report(sigdyn_status status) {
  if (status != SIGDYN_OK) std::cerr << "sigdyn: error: " << sigdyn_last_error() << "\n";
  return static_cast<int>(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Signalling and population-dynamics simulator"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(sigdyn_version()));

  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string out;
  app.add_option("--seed", seed, "Override simulation.master_seed");
  app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", out, "Output file or directory");

  std::string scenario_path;
  auto add_scenario = [&](CLI::App* sub) {
    sub->add_option("scenario", scenario_path, "Scenario file (JSON)")->required();
  };

  auto* enumerate = app.add_subcommand("enumerate", "Print K and optionally write the population index CSV");
  add_scenario(enumerate);

  auto* build = app.add_subcommand("build-matrix", "Build the transition matrix and its metadata sidecar");
  add_scenario(build);

  auto* certify = app.add_subcommand("certify", "Print the average-contractivity report");
  add_scenario(certify);

  auto* simulate = app.add_subcommand("simulate", "Run the Monte-Carlo ensemble");
  add_scenario(simulate);
  std::uint64_t trajectories = 0;
  std::optional<std::uint64_t> paths;
  simulate->add_option("--trajectories", trajectories, "Also dump the first N sample paths");
  simulate->add_option("--paths", paths, "Override simulation.paths")->check(CLI::PositiveNumber);

  auto* optimum = app.add_subcommand("optimum", "Grid search for the social-cost optimum (M = 2)");
  add_scenario(optimum);
  double resolution = 0.001;
  optimum->add_option("--resolution", resolution, "Grid spacing in (0, 0.5]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return SIGDYN_ERROR_VALIDATION;
  }

  ScenarioHandle scenario;
  if (int rc = report(sigdyn_scenario_load(scenario_path.c_str(), &scenario.ptr))) return rc;
  if (seed)
    if (int rc = report(sigdyn_scenario_set_seed(scenario.ptr, *seed))) return rc;
  if (threads)
    if (int rc = report(sigdyn_scenario_set_threads(scenario.ptr, *threads))) return rc;

  if (enumerate->parsed()) {
    std::uint64_t k = 0;
    if (int rc = report(sigdyn_enumerate(scenario.ptr, out.empty() ? nullptr : out.c_str(), &k))) return rc;
    std::cout << "K = " << k << "\n";
    return 0;
  }
  if (build->parsed()) {
    if (out.empty()) out = "matrix.csv";
    std::uint64_t k = 0, solves = 0;
    if (int rc = report(sigdyn_build_matrix(scenario.ptr, out.c_str(), &k, &solves))) return rc;
    std::cout << "K = " << k << "\n"
              << "distance computations = " << solves << "\n"
              << "wrote " << out << " and " << out << ".json\n";
    return 0;
  }
  if (certify->parsed()) {
    OwnedString json;
    if (int rc = report(sigdyn_certify(scenario.ptr, &json.ptr))) return rc;
    if (out.empty()) {
      std::cout << json.ptr;
    } else {
      std::FILE* f = std::fopen(out.c_str(), "wb");
      if (!f) {
        std::cerr << "sigdyn: error: cannot write " << out << "\n";
        return SIGDYN_ERROR_RUNTIME;
      }
      std::fputs(json.ptr, f);
      std::fclose(f);
    }
    return 0;
  }
  if (simulate->parsed()) {
    if (out.empty()) out = "sigdyn-out";
    if (paths)
      if (int rc = report(sigdyn_scenario_set_paths(scenario.ptr, *paths))) return rc;
    OwnedString summary;
    if (int rc = report(sigdyn_simulate(scenario.ptr, out.c_str(), trajectories, &summary.ptr))) return rc;
    std::cout << summary.ptr;
    return 0;
  }
  if (optimum->parsed()) {
    double fraction = 0.0, value = 0.0;
    if (int rc = report(sigdyn_optimum(scenario.ptr, resolution, &fraction, &value))) return rc;
    std::printf("fraction = %.6f\nvalue = %.6f\n", fraction, value);
    return 0;
  }
  return SIGDYN_ERROR_VALIDATION;
}
