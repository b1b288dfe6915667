// Copyright 2026 The qtomo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Text formats.
//
// Expectation file (UTF-8, one record per line):
//
//   # format_version=1
//   # n_qubits=2
//   # default_sigma=1          (optional; rows may then omit sigma)
//   # seed=42                  (any further key=value lines are metadata)
//   IX,0.5,0.05
//
// Matrix file:
//
//   # format_version=1
//   # dim=4
//   0.5,0 0.5,0 0,0 0,0
//   ...                        (one row per line, space-separated re,im)
//
// Numbers are written in shortest round-trip form, so formatting a parsed
// file reproduces it byte for byte.

#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "qtomo/error.hpp"
#include "qtomo/linalg.hpp"
#include "qtomo/metrics.hpp"
#include "qtomo/pauli.hpp"
#include "qtomo/sim.hpp"

namespace qtomo::io {

inline constexpr int kFormatVersion = 1;

using Metadata = std::vector<std::pair<std::string, std::string>>;

inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw Error(ErrorCode::kIoError, "number formatting failed");
  return std::string(buf, end);
}

inline double parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::kParseError, "invalid number '" + std::string(s) + "'");
  }
  return v;
}

inline long parse_int(std::string_view s) {
  long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::kParseError, "invalid integer '" + std::string(s) + "'");
  }
  return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

namespace detail {

// "# key=value" -> (key, value); other comment lines -> nullopt.
inline std::optional<std::pair<std::string, std::string>> header_entry(std::string_view line) {
  line.remove_prefix(1);
  while (!line.empty() && line.front() == ' ') line.remove_prefix(1);
  const auto eq = line.find('=');
  if (eq == std::string_view::npos || eq == 0) return std::nullopt;
  return std::pair{std::string(line.substr(0, eq)), std::string(line.substr(eq + 1))};
}

inline std::vector<std::string_view> lines_of(std::string_view text) {
  auto out = split(text, '\n');
  for (auto& l : out)
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
  return out;
}

}  // namespace detail

struct ExpectationFile {
  int format_version = kFormatVersion;
  std::optional<double> default_sigma;
  Metadata metadata;
  ExpectationSet data{1};

  int n_qubits() const { return data.n_qubits(); }
};

inline std::string format_expectations(const ExpectationFile& f) {
  std::string out;
  out += "# format_version=" + std::to_string(f.format_version) + "\n";
  out += "# n_qubits=" + std::to_string(f.n_qubits()) + "\n";
  if (f.default_sigma) out += "# default_sigma=" + format_double(*f.default_sigma) + "\n";
  for (const auto& [k, v] : f.metadata) out += "# " + k + "=" + v + "\n";
  for (const auto& [p, m] : f.data.records())
    out += p.label() + "," + format_double(m.value) + "," + format_double(m.sigma) + "\n";
  return out;
}

inline ExpectationFile parse_expectations(std::string_view text) {
  ExpectationFile f;
  std::optional<int> n_qubits;
  bool have_version = false;
  bool data_started = false;
  int line_no = 0;
  for (auto line : detail::lines_of(text)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (line.front() == '#') {
      if (data_started) continue;
      auto entry = detail::header_entry(line);
      if (!entry) continue;
      auto& [key, value] = *entry;
      if (key == "format_version") {
        f.format_version = static_cast<int>(parse_int(value));
        if (f.format_version != kFormatVersion) {
          throw Error(ErrorCode::kParseError, where + "unsupported format_version " + value);
        }
        have_version = true;
      } else if (key == "n_qubits") {
        n_qubits = static_cast<int>(parse_int(value));
        f.data = ExpectationSet(*n_qubits);
      } else if (key == "default_sigma") {
        f.default_sigma = parse_double(value);
        if (!(*f.default_sigma > 0.0)) {
          throw Error(ErrorCode::kZeroSigma, where + "default_sigma must be positive");
        }
      } else {
        f.metadata.emplace_back(std::move(key), std::move(value));
      }
      continue;
    }
    if (!n_qubits) throw Error(ErrorCode::kParseError, where + "record before n_qubits header");
    data_started = true;
    const auto fields = split(line, ',');
    if (fields.size() != 2 && fields.size() != 3) {
      throw Error(ErrorCode::kParseError, where + "expected label,value[,sigma]");
    }
    const PauliString p = PauliString::parse(fields[0]);
    if (f.data.contains(p)) {
      throw Error(ErrorCode::kInvalidRecord, where + "duplicate label " + p.label());
    }
    const double value = parse_double(fields[1]);
    double sigma = 0.0;
    if (fields.size() == 3) {
      sigma = parse_double(fields[2]);
    } else if (f.default_sigma) {
      sigma = *f.default_sigma;
    } else {
      throw Error(ErrorCode::kParseError, where + "sigma missing and no default_sigma header");
    }
    f.data.set(p, value, sigma);
  }
  if (!have_version) throw Error(ErrorCode::kParseError, "missing format_version header");
  if (!n_qubits) throw Error(ErrorCode::kParseError, "missing n_qubits header");
  return f;
}

struct MatrixFile {
  Metadata metadata;
  ComplexMatrix matrix;
};

inline std::string format_matrix(const MatrixFile& f) {
  std::string out;
  out += "# format_version=" + std::to_string(kFormatVersion) + "\n";
  out += "# dim=" + std::to_string(f.matrix.dim()) + "\n";
  for (const auto& [k, v] : f.metadata) out += "# " + k + "=" + v + "\n";
  for (std::size_t r = 0; r < f.matrix.dim(); ++r) {
    for (std::size_t c = 0; c < f.matrix.dim(); ++c) {
      if (c) out += ' ';
      out += format_double(f.matrix(r, c).real()) + "," + format_double(f.matrix(r, c).imag());
    }
    out += '\n';
  }
  return out;
}

inline MatrixFile parse_matrix(std::string_view text) {
  MatrixFile f;
  std::optional<std::size_t> dim;
  bool have_version = false;
  std::vector<Complex> entries;
  std::size_t rows = 0;
  int line_no = 0;
  for (auto line : detail::lines_of(text)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (line.front() == '#') {
      if (rows > 0) continue;
      auto entry = detail::header_entry(line);
      if (!entry) continue;
      auto& [key, value] = *entry;
      if (key == "format_version") {
        if (parse_int(value) != kFormatVersion) {
          throw Error(ErrorCode::kParseError, where + "unsupported format_version " + value);
        }
        have_version = true;
      } else if (key == "dim") {
        const long d = parse_int(value);
        if (d < 1) throw Error(ErrorCode::kParseError, where + "dim must be >= 1");
        dim = static_cast<std::size_t>(d);
      } else {
        f.metadata.emplace_back(std::move(key), std::move(value));
      }
      continue;
    }
    if (!dim) throw Error(ErrorCode::kParseError, where + "row before dim header");
    std::size_t count = 0;
    for (auto token : split(line, ' ')) {
      if (token.empty()) continue;
      const auto parts = split(token, ',');
      if (parts.size() != 2) throw Error(ErrorCode::kParseError, where + "entry must be re,im");
      entries.emplace_back(parse_double(parts[0]), parse_double(parts[1]));
      ++count;
    }
    if (count != *dim) {
      throw Error(ErrorCode::kParseError, where + "expected " + std::to_string(*dim) + " entries");
    }
    ++rows;
  }
  if (!have_version) throw Error(ErrorCode::kParseError, "missing format_version header");
  if (!dim) throw Error(ErrorCode::kParseError, "missing dim header");
  if (rows != *dim) throw Error(ErrorCode::kParseError, "expected " + std::to_string(*dim) + " rows");
  f.matrix = ComplexMatrix(*dim, std::move(entries));
  return f;
}

/// Rounds to 12 significant digits for report output.
inline double round12(double v) {
  if (!std::isfinite(v) || v == 0.0) return v;
  char buf[40];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::scientific, 11);
  if (ec != std::errc{}) return v;
  double out = v;
  std::from_chars(buf, end, out);
  return out;
}

/// Report as JSON with a fixed key order.
inline nlohmann::ordered_json report_json(const ReconstructionReport& r) {
  nlohmann::ordered_json j;
  auto spectrum = nlohmann::ordered_json::array();
  for (double v : r.spectrum) spectrum.push_back(round12(v));
  j["spectrum"] = std::move(spectrum);
  j["purity"] = round12(r.purity);
  j["fidelity"] = r.fidelity ? nlohmann::ordered_json(round12(*r.fidelity)) : nlohmann::ordered_json();
  j["eta"] = r.eta ? nlohmann::ordered_json(round12(*r.eta)) : nlohmann::ordered_json();
  j["physical"] = r.physical;
  j["min_eigenvalue"] = round12(r.min_eigenvalue);
  return j;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write '" + path + "'");
  out << contents;
  if (!out) throw Error(ErrorCode::kIoError, "write failed for '" + path + "'");
}

/// "0:0.04:0.16" (start:step:stop, inclusive) or "0,0.04,0.08".
inline std::vector<double> parse_time_grid(std::string_view spec) {
  std::vector<double> out;
  if (spec.find(':') != std::string_view::npos) {
    const auto parts = split(spec, ':');
    if (parts.size() != 3) throw Error(ErrorCode::kParseError, "time grid must be start:step:stop");
    const double start = parse_double(parts[0]);
    const double step = parse_double(parts[1]);
    const double stop = parse_double(parts[2]);
    if (!(step > 0.0) || stop < start) throw Error(ErrorCode::kParseError, "bad time grid");
    const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
    for (long k = 0; k <= n; ++k) out.push_back(start + static_cast<double>(k) * step);
  } else {
    for (auto part : split(spec, ',')) out.push_back(parse_double(part));
  }
  for (double t : out)
    if (!(t >= 0.0)) throw Error(ErrorCode::kParseError, "times must be >= 0");
  return out;
}

}  // namespace qtomo::io
