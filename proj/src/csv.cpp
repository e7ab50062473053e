// Copyright 2026 The contactdyn Authors
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

#include "contactdyn/csv.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "contactdyn/errors.hpp"

namespace contactdyn::csv {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string format(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

int Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  throw DataError("missing column '" + name + "'");
}

double Table::number(std::size_t row, int col) const {
  const std::string& s = rows.at(row).at(col);
  if (s == "nan") return std::nan("");
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw DataError("row " + std::to_string(row + 1) + ", column '" + header.at(col) + "': '" + s +
                    "' is not a number");
  }
  return v;
}

Table read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  Table t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (t.units.empty()) t.units = line.substr(line.size() > 1 && line[1] == ' ' ? 2 : 1);
      continue;
    }
    auto cells = split(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(t.header.size()) + " fields, found " + std::to_string(cells.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  if (t.header.empty()) throw DataError("'" + path.string() + "' has no header");
  return t;
}

Writer::Writer(const std::filesystem::path& path, const std::string& units, const std::vector<std::string>& header)
    : out_(path), width_(header.size()) {
  if (!out_) throw DataError("cannot write '" + path.string() + "'");
  if (!units.empty()) out_ << "# " << units << '\n';
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

void Writer::row(const std::vector<std::string>& cells) {
  if (cells.size() != width_) throw DataError("csv row width mismatch");
  for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
  out_ << '\n';
}

void Writer::row(const std::vector<double>& values) {
  if (values.size() != width_) throw DataError("csv row width mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format(values[i]);
  out_ << '\n';
}

}  // namespace contactdyn::csv
