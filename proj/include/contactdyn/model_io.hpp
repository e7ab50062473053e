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

// Model description files and built-in presets.
//
// A model file is JSON with a mandatory `"format": 1` key:
//
//   {
//     "format": 1,
//     "name": "pendulum",
//     "gravity": [0, 0, -9.81],
//     "links":  [{"name": "bob", "mass": 1.0, "com": [0, 0, -1],
//                 "inertia": [ixx, iyy, izz, ixy, ixz, iyz]}],
//     "joints": [{"name": "hinge", "type": "revolute", "parent": "world",
//                 "child": "bob", "axis": [1, 0, 0],
//                 "origin": {"xyz": [0, 0, 0], "rpy": [0, 0, 0]}}],
//     "contacts": [{"name": "lf", "link": "l_foot", "reference": [0, 0, -0.098],
//                   "points": [[0.1325, 0.08, -0.098], ...]}]
//   }
//
// `type` is one of revolute | prismatic | floating; `inertia` may also be a
// 3x3 nested array. Lengths in m, masses in kg, inertias in kg m^2 about the
// link COM, angles in rad (rpy applied as Rz(y) Ry(p) Rx(r)).

#ifndef CONTACTDYN_MODEL_IO_HPP_
#define CONTACTDYN_MODEL_IO_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "contactdyn/kinetree.hpp"
#include "json.hpp"

namespace contactdyn::model_io {

kinetree::ModelSpec model_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const kinetree::ModelSpec& spec);
kinetree::ModelSpec load_model_file(const std::filesystem::path& path);

// Built-in presets.
std::vector<std::string> preset_names();
kinetree::ModelSpec preset(const std::string& name);

// Preset name or path to a model file.
kinetree::ModelSpec resolve_model(const std::string& name_or_path);

// Fixed-base chain of point-ish masses swinging about world x, hanging along
// -z at q = 0. Link i has mass masses[i], length lengths[i] and COM at
// com_fraction * length along the link, with a small transverse inertia.
kinetree::ModelSpec pendulum_chain(const std::vector<double>& masses,
                                   const std::vector<double>& lengths,
                                   const std::vector<double>& com_distances,
                                   const std::vector<double>& inertias_about_com);

// Floating sphere of radius r with a single contact point at its bottom.
kinetree::ModelSpec ball(double mass, double radius);

// Floating box whose COM lies in the plane of its four sole corners.
kinetree::ModelSpec sliding_block(double mass, double length, double width);

// Geometry shared by presets and tools.
struct SurenaGeometry {
  double foot_length = 0.265;
  double foot_width = 0.160;
  double ankle_height = 0.098;
  double shank_length = 0.360;
  double thigh_length = 0.360;
  double hip_spacing = 0.230;
  double hip_drop = 0.115;
  double pelvis_to_head = 0.967;
};

}  // namespace contactdyn::model_io

#endif  // CONTACTDYN_MODEL_IO_HPP_
