// Copyright 2026 The sigdyn Authors
// SPDX-License-Identifier: Apache-2.0

#include "sigdyn/matrix_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "sigdyn/error.hpp"

namespace sigdyn {

namespace fs = std::filesystem;

std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) fail_runtime("failed to format a double");
  return std::string(buf.data(), ptr);
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail_runtime("cannot open '" + tmp.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) fail_runtime("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) fail_runtime("cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_runtime("cannot open '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

MatrixInfo file_info() {
  MatrixInfo info;
  info.builder = "file";
  return info;
}

}  // namespace

void write_matrix_csv(const TransitionMatrix& p, const fs::path& path) {
  const std::size_t K = p.size();
  std::string out;
  out.reserve(K * K * 24);
  for (std::size_t j = 0; j < K; ++j) {
    if (j) out += ',';
    out += 'p';
    out += std::to_string(j);
  }
  out += '\n';
  for (std::size_t i = 0; i < K; ++i) {
    for (std::size_t j = 0; j < K; ++j) {
      if (j) out += ',';
      out += format_double(p(i, j));
    }
    out += '\n';
  }
  write_file_atomic(path, out);
}

TransitionMatrix read_matrix_csv(const fs::path& path) {
  const std::string text = read_file(path);
  std::vector<double> entries;
  std::size_t cols = 0, rows = 0;
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string_view line(text.data() + pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1) {
      cols = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
      continue;
    }
    std::size_t n = 0;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (;;) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(p, end, v);
      if (ec != std::errc())
        fail_validation(path.string() + ":" + std::to_string(line_no) + ": malformed number");
      entries.push_back(v);
      ++n;
      p = ptr;
      if (p == end) break;
      if (*p != ',')
        fail_validation(path.string() + ":" + std::to_string(line_no) + ": expected ','");
      ++p;
    }
    if (n != cols)
      fail_validation(path.string() + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(cols) + " columns, found " + std::to_string(n));
    ++rows;
  }
  if (rows != cols)
    fail_validation(path.string() + ": matrix is " + std::to_string(rows) + "x" +
                    std::to_string(cols) + ", expected square");
  return TransitionMatrix(rows, std::move(entries), file_info());
}

namespace {

constexpr std::array<char, 8> kMagic{'S', 'I', 'G', 'D', 'Y', 'N', 'P', 'M'};

template <class T>
void put_le(std::string& out, T value) {
  static_assert(std::endian::native == std::endian::little, "big-endian hosts unsupported");
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  out.append(bytes, sizeof(T));
}

template <class T>
T get_le(const std::string& in, std::size_t& pos, const fs::path& path) {
  if (pos + sizeof(T) > in.size()) fail_validation(path.string() + ": truncated binary matrix");
  T value;
  std::memcpy(&value, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return value;
}

}  // namespace

void write_matrix_binary(const TransitionMatrix& p, const fs::path& path) {
  const std::size_t K = p.size();
  std::string out;
  out.reserve(32 + K * K * 8);
  out.append(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, 1);
  put_le<std::uint32_t>(out, 0);
  put_le<std::uint64_t>(out, K);
  put_le<std::uint64_t>(out, K);
  for (double x : p.entries()) put_le<double>(out, x);
  write_file_atomic(path, out);
}

TransitionMatrix read_matrix_binary(const fs::path& path) {
  const std::string in = read_file(path);
  if (in.size() < kMagic.size() || std::memcmp(in.data(), kMagic.data(), kMagic.size()) != 0)
    fail_validation(path.string() + ": not a sigdyn binary matrix");
  std::size_t pos = kMagic.size();
  const auto version = get_le<std::uint32_t>(in, pos, path);
  if (version != 1) fail_validation(path.string() + ": unsupported version " + std::to_string(version));
  (void)get_le<std::uint32_t>(in, pos, path);
  const auto rows = get_le<std::uint64_t>(in, pos, path);
  const auto cols = get_le<std::uint64_t>(in, pos, path);
  if (rows != cols) fail_validation(path.string() + ": matrix is not square");
  if (in.size() - pos != rows * cols * sizeof(double))
    fail_validation(path.string() + ": payload size does not match the header");
  std::vector<double> entries(rows * cols);
  std::memcpy(entries.data(), in.data() + pos, entries.size() * sizeof(double));
  return TransitionMatrix(rows, std::move(entries), file_info());
}

void write_matrix(const TransitionMatrix& p, const fs::path& path) {
  if (path.extension() == ".bin")
    write_matrix_binary(p, path);
  else
    write_matrix_csv(p, path);
}

TransitionMatrix read_matrix(const fs::path& path) {
  return path.extension() == ".bin" ? read_matrix_binary(path) : read_matrix_csv(path);
}

std::string matrix_info_json(const MatrixInfo& info, std::size_t k) {
  nlohmann::ordered_json j;
  j["builder"] = info.builder;
  j["K"] = k;
  if (info.metric) j["metric"] = to_string(*info.metric);
  if (info.psi) j["psi"] = *info.psi;
  if (!info.blocks.empty()) j["blocks"] = info.blocks;
  if (!info.omegas.empty()) {
    auto& arr = j["policies"] = nlohmann::ordered_json::array();
    for (const Rational& r : info.omegas)
      arr.push_back(r.den == 1 ? std::to_string(r.num)
                               : std::to_string(r.num) + "/" + std::to_string(r.den));
  }
  if (info.agents) j["agents"] = *info.agents;
  if (info.builder == "emd") j["distance_computations"] = info.distance_computations;
  j["storage"] = "row-major, rows and columns in lexicographic population order";
  return j.dump(2) + "\n";
}

void write_matrix_metadata(const TransitionMatrix& p, const fs::path& matrix_path) {
  fs::path side = matrix_path;
  side += ".json";
  write_file_atomic(side, matrix_info_json(p.info(), p.size()));
}

}  // namespace sigdyn
