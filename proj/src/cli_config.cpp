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

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "contactdyn/cli.hpp"
#include "contactdyn/contact_models.hpp"
#include "contactdyn/errors.hpp"
#include "contactdyn/ident.hpp"
#include "contactdyn/model_io.hpp"
#include "contactdyn/sim.hpp"

namespace contactdyn::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json normal_block(const std::string& model, const std::string& set = "fig5-consistent") {
  return json{{"model", model}, {"params", contact::normal_to_json(contact::normal_preset(model, set))}};
}

json friction_block(const std::string& model) {
  json params = json::object();
  if (model != "none") {
    try {
      params = contact::friction_to_json(contact::friction_from_json(model, json::object()));
    } catch (const ValidationError&) {
      throw;
    } catch (const std::exception&) {
      // Models without defaults (juhasz) start empty and must be filled in.
    }
  }
  return json{{"model", model}, {"params", params}};
}

// Walk and compare share everything except the rigid input file.
json walk_defaults() {
  const sim::WalkOptions w;
  return json{
      {"format", 1},
      {"model", "surena-lower"},
      {"gait", "gaits/gait_0p5kmh.csv"},
      {"schedule", ""},
      {"contact",
       {{"normal", {{"model", "tanbarrier"}, {"params", contact::normal_to_json(w.contact.normal)}}},
        {"friction", {{"model", "pseudo-coulomb"}, {"params", contact::friction_to_json(*w.contact.friction)}}},
        {"ground_height", w.contact.ground_height}}},
      {"dt", w.dt},
      {"duration", w.duration},
      {"decimation", w.decimation},
      {"fall_fraction", w.fall_fraction},
      {"posture_gain", w.posture_gain},
      {"feedforward", w.feedforward},
      {"gains", {{"kp", 1.5e4}, {"kd", 150.0}}},
      {"zmp_window", 21},
      {"mu", 0.8},
      {"sole_height", 0.0},
      {"drive", ""},
  };
}

// Resets the sibling parameter block when a contact model is renamed, so a
// stale coefficient set of another law is never reused.
void reset_params_for(json& block, const std::string& path) {
  const std::string model = block.at("model").get<std::string>();
  if (path.ends_with("contact.normal")) block = normal_block(model);
  if (path.ends_with("contact.friction")) block = friction_block(model);
}

std::string join_keys(const json& obj) {
  std::string s;
  for (auto it = obj.begin(); it != obj.end(); ++it) s += (s.empty() ? "" : ", ") + it.key();
  return s;
}

double parse_number(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ValidationError("--set " + key + ": '" + text + "' is not a number");
  }
  return v;
}

json parse_like(const std::string& key, const json& current, const std::string& text) {
  if (current.is_boolean()) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw ValidationError("--set " + key + ": expected true or false, got '" + text + "'");
  }
  if (current.is_number_integer() || current.is_number_unsigned()) {
    const double v = parse_number(key, text);
    if (v != static_cast<double>(static_cast<long long>(v))) {
      throw ValidationError("--set " + key + ": expected an integer, got '" + text + "'");
    }
    return static_cast<long long>(v);
  }
  if (current.is_number()) return parse_number(key, text);
  if (current.is_string()) return text;
  if (current.is_array()) {
    if (!text.empty() && text.front() == '[') return json::parse(text);
    json arr = json::array();
    if (text.empty()) return arr;
    const bool numeric = current.empty() ? false : current.front().is_number();
    std::istringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (numeric) {
        arr.push_back(parse_number(key, item));
      } else {
        arr.push_back(item);
      }
    }
    return arr;
  }
  return json::parse(text);
}

void rebase(json& value, const fs::path& dir) {
  auto one = [&](json& v) {
    if (!v.is_string()) return;
    const fs::path p = v.get<std::string>();
    if (p.empty() || p.is_absolute()) return;
    if (fs::exists(dir / p)) v = (dir / p).lexically_normal().string();
  };
  for (const char* key : {"gait", "schedule", "drive", "meta", "table", "rigid"}) {
    if (value.contains(key)) one(value[key]);
  }
  if (value.contains("model") && value["model"].is_string()) {
    const auto names = model_io::preset_names();
    if (std::find(names.begin(), names.end(), value["model"].get<std::string>()) == names.end()) one(value["model"]);
  }
  if (value.contains("experiments") && value["experiments"].is_array()) {
    for (auto& e : value["experiments"]) one(e);
  }
}

}  // namespace

std::vector<std::string> command_names() { return {"ball-drop", "invdyn", "walk", "identify", "compare"}; }

json default_config(const std::string& command) {
  if (command == "ball-drop") {
    const sim::BallDropOptions b;
    json params = json::object();
    for (const auto& m : contact::normal_model_names()) {
      params[m] = contact::normal_to_json(contact::normal_preset(m, "fig5-consistent"));
    }
    return json{
        {"format", 1},
        {"masses", {10.0, 20.0, 30.0, 40.0, 50.0}},
        {"velocities", {0.0}},
        {"models", {"mclean", "tanbarrier"}},
        {"params", params},
        {"radius", b.radius},
        {"dt", b.dt},
        {"duration", b.duration},
        {"drop_height", b.drop_height},
        {"decimation", b.decimation},
        {"traces", true},
    };
  }
  if (command == "invdyn") {
    return json{{"format", 1},           {"model", "surena-lower"}, {"gait", "gaits/gait_0p5kmh.csv"},
                {"schedule", ""},        {"mu", 0.8},               {"sole_height", 0.0}};
  }
  if (command == "walk") {
    json j = walk_defaults();
    j["rigid"] = "";
    return j;
  }
  if (command == "compare") return walk_defaults();
  if (command == "identify") {
    json basis = json::array();
    for (auto t : ident::default_basis()) basis.push_back(ident::column_name(t));
    return json{
        {"format", 1},
        {"experiments", json::array()},
        {"meta", ""},
        {"basis", basis},
        {"cutoff_hz", ident::DeriveOptions{}.cutoff_hz},
        {"table", ""},
        {"cm_threshold_percent", 10.0},
    };
  }
  std::string names;
  for (const auto& n : command_names()) names += " " + n;
  throw ValidationError("unknown command '" + command + "'; commands:" + names);
}

void merge_config(json& config, const json& overlay, const std::string& prefix) {
  if (!overlay.is_object()) throw ValidationError("config" + (prefix.empty() ? "" : " '" + prefix + "'") + " must be an object");
  // A renamed contact law brings its own complete coefficient block.
  const bool renamed = overlay.contains("model") && config.contains("model") && config.contains("params") &&
                       config["params"].is_object() && overlay["model"] != config["model"];
  for (auto it = overlay.begin(); it != overlay.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!config.contains(it.key())) {
      throw ValidationError("unknown config key '" + key + "'; known here: " + join_keys(config));
    }
    json& slot = config[it.key()];
    if (it.key() == "params" && renamed) continue;
    if (slot.is_object() && it.value().is_object()) {
      merge_config(slot, it.value(), key);
    } else {
      slot = it.value();
    }
  }
  if (renamed) {
    reset_params_for(config, prefix);
    if (overlay.contains("params")) config["params"] = overlay["params"];
  }
}

void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ValidationError("--set expects key=value, got '" + assignment + "'");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);
  json* parent = &config;
  std::string parent_path;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!parent->is_object() || !parent->contains(part)) {
      throw ValidationError("--set: unknown config key '" + key + "'" +
                            (parent->is_object() ? "; known here: " + join_keys(*parent) : ""));
    }
    if (dot == std::string::npos) {
      json parsed;
      try {
        parsed = parse_like(key, (*parent)[part], value);
      } catch (const json::exception& e) {
        throw ValidationError("--set " + key + ": " + e.what());
      }
      if ((*parent)[part].is_object()) {
        merge_config((*parent)[part], parsed, key);
      } else {
        const bool renamed = part == "model" && parent->contains("params") && (*parent)[part] != parsed;
        (*parent)[part] = parsed;
        if (renamed) reset_params_for(*parent, parent_path);
      }
      return;
    }
    parent_path = parent_path.empty() ? part : parent_path + "." + part;
    parent = &(*parent)[part];
    start = dot + 1;
  }
}

fs::path data_root() {
  if (const char* env = std::getenv("CONTACTDYN_DATA"); env && *env) return env;
  return CONTACTDYN_DEFAULT_DATA_DIR;
}

std::string resolve_input(const std::string& path) {
  if (path.empty()) return path;
  const fs::path p = path;
  if (p.is_absolute()) {
    if (!fs::exists(p)) throw DataError("cannot find input '" + path + "'");
    return p.lexically_normal().string();
  }
  if (fs::exists(p)) return fs::absolute(p).lexically_normal().string();
  const fs::path bundled = data_root() / p;
  if (fs::exists(bundled)) return fs::absolute(bundled).lexically_normal().string();
  throw DataError("cannot find input '" + path + "' in the working directory or in " + data_root().string());
}

json load_config_file(const fs::path& path, const std::string& command) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw DataError(path.string() + ": expected a JSON object");
  if (j.contains("command")) {
    if (j["command"] != command) {
      throw ValidationError(path.string() + " is a manifest of '" + j["command"].get<std::string>() + "', not '" +
                            command + "'");
    }
    if (!j.contains("config")) throw DataError(path.string() + ": manifest has no 'config'");
    j = j["config"];
  }
  if (j.contains("format") && j["format"] != 1) throw DataError(path.string() + ": unsupported format");
  rebase(j, fs::absolute(path).parent_path());
  return j;
}

}  // namespace contactdyn::cli
