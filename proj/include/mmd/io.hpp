/* Copyright 2026 The MMD Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

  http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// File formats: single-column text and MMDSIG01 binary series, CSV tables
// with a one-line header, and key=value run configs.

#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mmd/errors.hpp"

namespace mmd::io {

namespace fs = std::filesystem;

inline constexpr char kBinaryMagic[8] = {'M', 'M', 'D', 'S', 'I', 'G', '0', '1'};

enum class SeriesFormat { text, binary };

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed for " + path.string());
  return ss.str();
}

inline void write_file(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

/// Binary when the file starts with the magic, text otherwise.
inline SeriesFormat detect_format(const std::string& bytes) {
  return bytes.size() >= 8 && std::memcmp(bytes.data(), kBinaryMagic, 8) == 0
             ? SeriesFormat::binary
             : SeriesFormat::text;
}

inline std::vector<double> parse_text_series(const std::string& text, const std::string& name) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    const std::string tok = line.substr(b, e - b + 1);
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size() || !std::isfinite(v))
      throw ParseError(name + ":" + std::to_string(lineno) + ": not a finite number: '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

inline std::vector<double> parse_binary_series(const std::string& bytes, const std::string& name) {
  if ((bytes.size() - 8) % 8 != 0)
    throw ParseError(name + ": binary payload is not a whole number of doubles");
  const std::size_t n = (bytes.size() - 8) / 8;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t u = 0;
    for (int b = 7; b >= 0; --b)
      u = (u << 8) | static_cast<unsigned char>(bytes[8 + i * 8 + static_cast<std::size_t>(b)]);
    out[i] = std::bit_cast<double>(u);
  }
  return out;
}

inline std::vector<double> read_series(const fs::path& path) {
  const std::string bytes = read_file(path);
  return detect_format(bytes) == SeriesFormat::binary ? parse_binary_series(bytes, path.string())
                                                      : parse_text_series(bytes, path.string());
}

inline std::string encode_series(const std::vector<double>& values, SeriesFormat format) {
  std::string out;
  if (format == SeriesFormat::binary) {
    out.assign(kBinaryMagic, 8);
    out.reserve(8 + 8 * values.size());
    for (double v : values) {
      std::uint64_t u = std::bit_cast<std::uint64_t>(v);
      for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((u >> (8 * b)) & 0xffu));
    }
  } else {
    for (double v : values) {
      out += format_double(v);
      out += '\n';
    }
  }
  return out;
}

inline void write_series(const fs::path& path, const std::vector<double>& values,
                         SeriesFormat format = SeriesFormat::text) {
  write_file(path, encode_series(values, format));
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

inline void write_csv(const fs::path& path, const CsvTable& table) {
  std::string out;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) out += ',';
    out += table.header[i];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size())
      throw ValidationError("csv row width differs from header in " + path.string());
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_double(row[i]);
    }
    out += '\n';
  }
  write_file(path, out);
}

inline CsvTable read_csv(const fs::path& path) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  std::string line;
  CsvTable t;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty csv");
  {
    std::istringstream h(line);
    std::string cell;
    while (std::getline(h, cell, ',')) t.header.push_back(cell);
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream r(line);
    std::string cell;
    while (std::getline(r, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (cell.empty() || end != cell.c_str() + cell.size())
        throw ParseError(path.string() + ":" + std::to_string(lineno) + ": bad cell '" + cell + "'");
      row.push_back(v);
    }
    if (row.size() != t.header.size())
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": wrong column count");
    t.rows.push_back(std::move(row));
  }
  return t;
}

/// key=value lines; '#' starts a comment. Later keys override earlier ones.
inline std::map<std::string, std::string> parse_config(const std::string& text,
                                                       const std::string& name = "config") {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string{};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(name + ":" + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError(name + ":" + std::to_string(lineno) + ": empty key");
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

inline std::map<std::string, std::string> read_config(const fs::path& path) {
  return parse_config(read_file(path), path.string());
}

inline void write_config(const fs::path& path, const std::map<std::string, std::string>& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  write_file(path, out);
}

}  // namespace mmd::io
