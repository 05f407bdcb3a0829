// Copyright 2026 The sigdyn Authors
// SPDX-License-Identifier: Apache-2.0

// Scenario files (JSON). See docs/scenario-schema.md for the format.

#pragma once

#include <filesystem>
#include <string_view>

#include "sigdyn/sim.hpp"

namespace sigdyn {

/// Parses and validates a scenario. Relative `dynamics.path` entries are
/// resolved against `base_dir`. Every failure is a validation error whose
/// message starts with the offending key.
Scenario parse_scenario(std::string_view json_text,
                        const std::filesystem::path& base_dir = {});

Scenario load_scenario(const std::filesystem::path& path);

}  // namespace sigdyn
