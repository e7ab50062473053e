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

#ifndef CONTACTDYN_CSV_HPP_
#define CONTACTDYN_CSV_HPP_

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace contactdyn::csv {

// Shortest text that parses back to the same double.
std::string format(double v);

// Comma-separated table with a header row. Lines starting with '#' are
// comments; the first one is kept as `units`.
struct Table {
  std::string units;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // throws DataError when absent
  double number(std::size_t row, int col) const;
};

Table read(const std::filesystem::path& path);

class Writer {
 public:
  Writer(const std::filesystem::path& path, const std::string& units, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& cells);
  void row(const std::vector<double>& values);

 private:
  std::ofstream out_;
  std::size_t width_;
};

}  // namespace contactdyn::csv

#endif  // CONTACTDYN_CSV_HPP_
