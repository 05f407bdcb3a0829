// Copyright 2026 The sigdyn Authors
// SPDX-License-Identifier: Apache-2.0

// Scenario-level commands behind the C API and the command-line tool.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "sigdyn/scenario.hpp"
#include "sigdyn/sim.hpp"

namespace sigdyn::commands {

/// Returns K; when `csv_out` is given writes "index,n1..n|Ω|" rows.
std::size_t enumerate(const Scenario& s, const std::optional<std::filesystem::path>& csv_out);

struct BuildSummary {
  std::size_t states = 0;
  std::uint64_t distance_computations = 0;
  double max_row_defect = 0.0;
};

/// Builds the scenario's matrix, writes it (CSV, or binary for ".bin") and
/// the "<out>.json" metadata sidecar.
BuildSummary build_matrix(const Scenario& s, const std::filesystem::path& out);

/// Certificate as pretty-printed JSON. Fails with a validation error when a
/// resource lacks `lipschitz`/`kappa` or when q2 > q1 does not hold.
std::string certify(const Scenario& s);

struct SimulateSummary {
  std::size_t paths = 0;
  std::size_t horizon = 0;
  std::string summary_json;
};

/// Writes ensemble.csv, probes.csv, diagnostics.csv and summary.json into
/// `out_dir`, plus trajectory_<id>.csv for the first `dump_trajectories` paths.
SimulateSummary simulate(const Scenario& s, const std::filesystem::path& out_dir,
                         std::size_t dump_trajectories = 0);

GridOptimum optimum(const Scenario& s, double resolution);

}  // namespace sigdyn::commands
