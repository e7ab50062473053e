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

#ifndef CONTACTDYN_CLI_HPP_
#define CONTACTDYN_CLI_HPP_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace contactdyn::cli {

enum ExitCode : int {
  kOk = 0,
  kFall = 2,
  kNumeric = 3,
  kUsage = 64,
  kData = 65,
  kInternal = 70,
};

std::vector<std::string> command_names();  // ball-drop, invdyn, walk, identify, compare

// Complete configuration of a subcommand with every key at its default.
nlohmann::json default_config(const std::string& command);

// Copies `overlay` onto `config`. Every key of `overlay` must already exist
// in `config`; objects recurse except free-form parameter blocks, which are
// replaced whole. Throws ValidationError naming the first unknown key.
void merge_config(nlohmann::json& config, const nlohmann::json& overlay, const std::string& prefix = "");

// Applies one "dotted.key=value" override. The key must exist; the value is
// parsed to the type of the current entry (comma lists for arrays).
void apply_override(nlohmann::json& config, const std::string& assignment);

// Root of the bundled presets, gaits and scenarios: $CONTACTDYN_DATA when
// set, else the directory configured at build time.
std::filesystem::path data_root();

// Absolute path of an input file: absolute paths pass through, then the
// working directory is tried, then data_root(). Empty stays empty.
std::string resolve_input(const std::string& path);

// Loads a config or manifest file. A manifest must name `command`.
nlohmann::json load_config_file(const std::filesystem::path& path, const std::string& command);

// Runs the command line. Streams receive the human-readable report and
// diagnostics; the return value is an ExitCode.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace contactdyn::cli

#endif  // CONTACTDYN_CLI_HPP_
