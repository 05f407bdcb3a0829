// Copyright 2026 The sigdyn Authors
// SPDX-License-Identifier: Apache-2.0

// Transition matrix files.
//
// CSV: a header line "p0,p1,...,p{K-1}" followed by one row per line, each
// entry in shortest round-trip decimal form (lossless for doubles).
//
// Binary: 8-byte magic "SIGDYNPM", uint32 version (1), uint32 reserved,
// uint64 rows, uint64 cols, then rows*cols IEEE-754 doubles, all
// little-endian, row-major.
//
// Metadata sidecar: "<matrix path>.json".

#pragma once

#include <filesystem>
#include <string>

#include "sigdyn/dynamics.hpp"

namespace sigdyn {

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

void write_matrix_csv(const TransitionMatrix& p, const std::filesystem::path& path);
TransitionMatrix read_matrix_csv(const std::filesystem::path& path);

void write_matrix_binary(const TransitionMatrix& p, const std::filesystem::path& path);
TransitionMatrix read_matrix_binary(const std::filesystem::path& path);

/// Dispatches on the extension: ".bin" is binary, anything else CSV.
void write_matrix(const TransitionMatrix& p, const std::filesystem::path& path);
TransitionMatrix read_matrix(const std::filesystem::path& path);

std::string matrix_info_json(const MatrixInfo& info, std::size_t k);
void write_matrix_metadata(const TransitionMatrix& p, const std::filesystem::path& matrix_path);

/// Writes via a temporary sibling file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace sigdyn
