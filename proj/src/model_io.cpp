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

#include "contactdyn/model_io.hpp"

#include <fstream>
#include <sstream>

#include "contactdyn/errors.hpp"

namespace contactdyn::model_io {

using kinetree::ContactGroupSpec;
using kinetree::JointSpec;
using kinetree::JointType;
using kinetree::LinkSpec;
using kinetree::ModelSpec;
using nlohmann::json;

namespace {

Vec3 vec3(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) {
    throw ValidationError(what + ": expected a 3-element array");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Mat3 inertia(const json& j, const std::string& what) {
  Mat3 m;
  if (j.is_array() && j.size() == 6) {
    const double ixx = j[0], iyy = j[1], izz = j[2], ixy = j[3], ixz = j[4], iyz = j[5];
    m << ixx, ixy, ixz, ixy, iyy, iyz, ixz, iyz, izz;
  } else if (j.is_array() && j.size() == 3) {
    for (int r = 0; r < 3; ++r) m.row(r) = vec3(j[r], what).transpose();
  } else {
    throw ValidationError(what + ": inertia must be [ixx,iyy,izz,ixy,ixz,iyz] or 3x3");
  }
  return m;
}

JointType joint_type(const std::string& s, const std::string& joint) {
  if (s == "revolute") return JointType::Revolute;
  if (s == "prismatic") return JointType::Prismatic;
  if (s == "floating") return JointType::Floating;
  throw ValidationError("joint '" + joint + "': unknown type '" + s + "'");
}

const char* joint_type_name(JointType t) {
  switch (t) {
    case JointType::Revolute: return "revolute";
    case JointType::Prismatic: return "prismatic";
    case JointType::Floating: return "floating";
  }
  return "revolute";
}

Mat3 box_inertia(double m, double x, double y, double z) {
  return Vec3(m * (y * y + z * z) / 12.0, m * (x * x + z * z) / 12.0,
              m * (x * x + y * y) / 12.0)
      .asDiagonal();
}

Mat3 rod_inertia(double m, double length, double radius) {
  const double t = m * (3 * radius * radius + length * length) / 12.0;
  return Vec3(t, t, m * radius * radius / 2.0).asDiagonal();
}

JointSpec joint(std::string name, JointType type, std::string parent, std::string child,
                Vec3 axis, Vec3 xyz) {
  JointSpec j;
  j.name = std::move(name);
  j.type = type;
  j.parent = std::move(parent);
  j.child = std::move(child);
  j.axis = axis;
  j.origin.translation = xyz;
  return j;
}

ContactGroupSpec sole(const std::string& name, const std::string& link, double length,
                      double width, double depth) {
  ContactGroupSpec c;
  c.name = name;
  c.link = link;
  c.reference = Vec3(0, 0, -depth);
  for (double sx : {1.0, -1.0}) {
    for (double sy : {1.0, -1.0}) {
      c.points.emplace_back(sx * length / 2, sy * width / 2, -depth);
    }
  }
  return c;
}

ModelSpec surena_lower() {
  const SurenaGeometry g;
  ModelSpec m;
  m.name = "surena-lower";
  // Masses from the robot's published table (grams -> kg); the thigh entry is
  // shared with the two small hip-mechanism bodies.
  const double foot = 3.859, ankle = 2.236, shank = 4.561, thigh = 6.327;
  const double pelvis = 17.800, upper = 36.234, hip_part = 0.5;

  m.links.push_back({"pelvis", pelvis, Vec3::Zero(), box_inertia(pelvis, 0.20, 0.32, 0.15)});
  for (const char* side : {"r", "l"}) {
    const std::string s = side;
    const double sign = s == "l" ? 1.0 : -1.0;
    m.links.push_back({s + "_hip_yaw_link", hip_part, Vec3::Zero(), box_inertia(hip_part, 0.08, 0.08, 0.08)});
    m.links.push_back({s + "_hip_roll_link", hip_part, Vec3::Zero(), box_inertia(hip_part, 0.08, 0.08, 0.08)});
    m.links.push_back({s + "_thigh", thigh - 2 * hip_part, Vec3(0, 0, -g.thigh_length / 2),
                       rod_inertia(thigh - 2 * hip_part, g.thigh_length, 0.06)});
    m.links.push_back({s + "_shank", shank, Vec3(0, 0, -g.shank_length / 2),
                       rod_inertia(shank, g.shank_length, 0.05)});
    m.links.push_back({s + "_ankle", ankle, Vec3::Zero(), box_inertia(ankle, 0.10, 0.10, 0.08)});
    m.links.push_back({s + "_foot", foot, Vec3(0, 0, -0.06),
                       box_inertia(foot, g.foot_length, g.foot_width, 0.06)});

    const Vec3 hip(0, sign * g.hip_spacing / 2, -g.hip_drop);
    m.joints.push_back(joint(s + "_hip_yaw", JointType::Revolute, "pelvis", s + "_hip_yaw_link", Vec3::UnitZ(), hip));
    m.joints.push_back(joint(s + "_hip_roll", JointType::Revolute, s + "_hip_yaw_link", s + "_hip_roll_link", Vec3::UnitX(), Vec3::Zero()));
    m.joints.push_back(joint(s + "_hip_pitch", JointType::Revolute, s + "_hip_roll_link", s + "_thigh", Vec3::UnitY(), Vec3::Zero()));
    m.joints.push_back(joint(s + "_knee", JointType::Revolute, s + "_thigh", s + "_shank", Vec3::UnitY(), Vec3(0, 0, -g.thigh_length)));
    m.joints.push_back(joint(s + "_ankle_pitch", JointType::Revolute, s + "_shank", s + "_ankle", Vec3::UnitY(), Vec3(0, 0, -g.shank_length)));
    m.joints.push_back(joint(s + "_ankle_roll", JointType::Revolute, s + "_ankle", s + "_foot", Vec3::UnitX(), Vec3::Zero()));
    m.contacts.push_back(sole(s == "l" ? "lf" : "rf", s + "_foot", g.foot_length, g.foot_width, g.ankle_height));
  }
  m.links.push_back({"upper_body", upper, Vec3(0, 0, 0.35), box_inertia(upper, 0.30, 0.45, 0.80)});
  m.joints.insert(m.joints.begin(), joint("base", JointType::Floating, "world", "pelvis", Vec3::UnitZ(), Vec3::Zero()));
  m.joints.push_back(joint("torso_yaw", JointType::Revolute, "pelvis", "upper_body", Vec3::UnitZ(), Vec3(0, 0, 0.10)));
  // Contact groups in (lf, rf) order.
  std::swap(m.contacts[0], m.contacts[1]);
  return m;
}

ModelSpec planar5() {
  ModelSpec m;
  m.name = "planar5";
  const double torso_m = 20.0, thigh_m = 6.0, shank_m = 4.0, l = 0.4;
  m.links.push_back({"torso", torso_m, Vec3(0, 0, 0.3), box_inertia(torso_m, 0.2, 0.3, 0.6)});
  m.joints.push_back(joint("base", JointType::Floating, "world", "torso", Vec3::UnitZ(), Vec3::Zero()));
  for (const char* side : {"r", "l"}) {
    const std::string s = side;
    const double sign = s == "l" ? 1.0 : -1.0;
    m.links.push_back({s + "_thigh", thigh_m, Vec3(0, 0, -l / 2), rod_inertia(thigh_m, l, 0.05)});
    m.links.push_back({s + "_shank", shank_m, Vec3(0, 0, -l / 2), rod_inertia(shank_m, l, 0.04)});
    m.joints.push_back(joint(s + "_hip", JointType::Revolute, "torso", s + "_thigh", Vec3::UnitY(), Vec3(0, sign * 0.1, 0)));
    m.joints.push_back(joint(s + "_knee", JointType::Revolute, s + "_thigh", s + "_shank", Vec3::UnitY(), Vec3(0, 0, -l)));
  }
  auto lf = sole("lf", "l_shank", 0.2, 0.1, l);
  auto rf = sole("rf", "r_shank", 0.2, 0.1, l);
  m.contacts = {lf, rf};
  return m;
}

}  // namespace

ModelSpec model_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("model: expected a JSON object");
  if (!j.contains("format") || j.at("format") != 1) {
    throw ValidationError("model: missing or unsupported 'format' (expected 1)");
  }
  ModelSpec m;
  m.name = j.value("name", "model");
  if (j.contains("gravity")) m.gravity = vec3(j["gravity"], "gravity");
  for (const auto& l : j.at("links")) {
    LinkSpec link;
    link.name = l.at("name").get<std::string>();
    link.mass = l.at("mass").get<double>();
    if (l.contains("com")) link.com = vec3(l["com"], "link '" + link.name + "' com");
    link.inertia = inertia(l.at("inertia"), "link '" + link.name + "'");
    m.links.push_back(link);
  }
  for (const auto& jj : j.at("joints")) {
    JointSpec jt;
    jt.name = jj.at("name").get<std::string>();
    jt.type = joint_type(jj.at("type").get<std::string>(), jt.name);
    jt.parent = jj.at("parent").get<std::string>();
    jt.child = jj.at("child").get<std::string>();
    if (jj.contains("axis")) jt.axis = vec3(jj["axis"], "joint '" + jt.name + "' axis");
    if (jj.contains("origin")) {
      const auto& o = jj["origin"];
      const Vec3 xyz = o.contains("xyz") ? vec3(o["xyz"], "origin xyz") : Vec3::Zero();
      const Vec3 rpy = o.contains("rpy") ? vec3(o["rpy"], "origin rpy") : Vec3::Zero();
      jt.origin = Pose::from_xyz_rpy(xyz, rpy);
    }
    m.joints.push_back(jt);
  }
  if (j.contains("contacts")) {
    for (const auto& c : j["contacts"]) {
      ContactGroupSpec g;
      g.name = c.at("name").get<std::string>();
      g.link = c.at("link").get<std::string>();
      if (c.contains("reference")) g.reference = vec3(c["reference"], "contact reference");
      for (const auto& p : c.at("points")) g.points.push_back(vec3(p, "contact point"));
      m.contacts.push_back(g);
    }
  }
  return m;
}

json model_to_json(const ModelSpec& m) {
  json j;
  j["format"] = 1;
  j["name"] = m.name;
  j["gravity"] = to_json(m.gravity);
  j["links"] = json::array();
  for (const auto& l : m.links) {
    const Mat3& i = l.inertia;
    j["links"].push_back({{"name", l.name},
                          {"mass", l.mass},
                          {"com", to_json(l.com)},
                          {"inertia", {i(0, 0), i(1, 1), i(2, 2), i(0, 1), i(0, 2), i(1, 2)}}});
  }
  j["joints"] = json::array();
  for (const auto& jt : m.joints) {
    const Vec3 ypr = jt.origin.rotation.eulerAngles(2, 1, 0);
    j["joints"].push_back({{"name", jt.name},
                           {"type", joint_type_name(jt.type)},
                           {"parent", jt.parent},
                           {"child", jt.child},
                           {"axis", to_json(jt.axis)},
                           {"origin", {{"xyz", to_json(jt.origin.translation)},
                                       {"rpy", {ypr[2], ypr[1], ypr[0]}}}}});
  }
  j["contacts"] = json::array();
  for (const auto& c : m.contacts) {
    json pts = json::array();
    for (const auto& p : c.points) pts.push_back(to_json(p));
    j["contacts"].push_back(
        {{"name", c.name}, {"link", c.link}, {"reference", to_json(c.reference)}, {"points", pts}});
  }
  return j;
}

ModelSpec load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("model file " + path.string() + ": " + e.what());
  }
  try {
    return model_from_json(j);
  } catch (const json::exception& e) {
    throw ValidationError("model file " + path.string() + ": " + e.what());
  }
}

std::vector<std::string> preset_names() { return {"planar5", "surena-lower"}; }

ModelSpec preset(const std::string& name) {
  if (name == "surena-lower") return surena_lower();
  if (name == "planar5") return planar5();
  throw ValidationError("unknown model preset '" + name + "'");
}

ModelSpec resolve_model(const std::string& name_or_path) {
  for (const auto& n : preset_names()) {
    if (n == name_or_path) return preset(n);
  }
  return load_model_file(name_or_path);
}

ModelSpec pendulum_chain(const std::vector<double>& masses, const std::vector<double>& lengths,
                         const std::vector<double>& com_distances,
                         const std::vector<double>& inertias_about_com) {
  ModelSpec m;
  m.name = "pendulum";
  std::string parent = "world";
  for (std::size_t i = 0; i < masses.size(); ++i) {
    const std::string name = "link" + std::to_string(i + 1);
    const double ic = inertias_about_com[i];
    // Only the x component enters planar swinging; the others keep it SPD.
    m.links.push_back({name, masses[i], Vec3(0, 0, -com_distances[i]), Vec3(ic, ic, ic).asDiagonal()});
    const Vec3 origin = i == 0 ? Vec3::Zero() : Vec3(0, 0, -lengths[i - 1]);
    m.joints.push_back(joint("joint" + std::to_string(i + 1), JointType::Revolute, parent, name, Vec3::UnitX(), origin));
    parent = name;
  }
  return m;
}

ModelSpec ball(double mass, double radius) {
  ModelSpec m;
  m.name = "ball";
  const double i = 0.4 * mass * radius * radius;
  m.links.push_back({"ball", mass, Vec3::Zero(), Vec3(i, i, i).asDiagonal()});
  m.joints.push_back(joint("base", JointType::Floating, "world", "ball", Vec3::UnitZ(), Vec3::Zero()));
  ContactGroupSpec c;
  c.name = "ball";
  c.link = "ball";
  c.reference = Vec3(0, 0, -radius);
  c.points = {Vec3(0, 0, -radius)};
  m.contacts.push_back(c);
  return m;
}

ModelSpec sliding_block(double mass, double length, double width) {
  ModelSpec m;
  m.name = "block";
  m.links.push_back({"block", mass, Vec3::Zero(), box_inertia(mass, length, width, 0.05)});
  m.joints.push_back(joint("base", JointType::Floating, "world", "block", Vec3::UnitZ(), Vec3::Zero()));
  m.contacts.push_back(sole("block", "block", length, width, 0.0));
  return m;
}

}  // namespace contactdyn::model_io
