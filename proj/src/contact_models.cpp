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

#include "contactdyn/contact_models.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "contactdyn/errors.hpp"

namespace contactdyn::contact {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

double parkkwon_stiffness(const ParkKwon& m, double d) {
  return m.stiffness ? m.stiffness(d) : m.k_z;
}

}  // namespace

void validate(const NormalModelParams& model) {
  std::visit(overloaded{
                 [](const Linear& m) {
                   require(positive(m.k_z) && positive(m.c_z), "linear: k_z and c_z must be > 0");
                 },
                 [](const WojtyraDamping& m) {
                   require(positive(m.k_z) && positive(m.c_max) && positive(m.h),
                           "wojtyra: k_z, c_max and h must be > 0");
                 },
                 [](const McLean& m) {
                   require(positive(m.k_z) && positive(m.b_z), "mclean: k_z and b_z must be > 0");
                 },
                 [](const Jackson& m) {
                   require(positive(m.k_z) && positive(m.c_z), "jackson: k_z and c_z must be > 0");
                 },
                 [](const ParkKwon& m) {
                   require(positive(m.alpha) && positive(m.k_z), "parkkwon: alpha and k_z must be > 0");
                 },
                 [](const Millard& m) {
                   require(positive(m.k_z) && positive(m.impact_speed),
                           "millard: k_z and impact_speed must be > 0");
                   require(m.restitution > 0.0 && m.restitution <= 1.0,
                           "millard: restitution must lie in (0, 1]");
                 },
                 [](const TanBarrier& m) {
                   require(positive(m.k_z) && positive(m.b_z) && positive(m.l_0),
                           "tanbarrier: k_z, b_z and l_0 must be > 0");
                 },
             },
             model);
}

void validate(const FrictionModelParams& model) {
  auto mu_ok = [](double mu) { return std::isfinite(mu) && mu >= 0.0 && mu <= 2.0; };
  std::visit(overloaded{
                 [&](const SignCoulomb& m) {
                   require(mu_ok(m.mu_low) && mu_ok(m.mu_high), "sign-coulomb: mu must lie in [0, 2]");
                   require(positive(m.v_threshold), "sign-coulomb: v_threshold must be > 0");
                 },
                 [&](const PseudoCoulomb& m) {
                   require(mu_ok(m.mu), "pseudo-coulomb: mu must lie in [0, 2]");
                   require(positive(m.lambda), "pseudo-coulomb: lambda must be > 0");
                 },
                 [&](const Juhasz& m) {
                   require(mu_ok(m.mu_dyn) && mu_ok(m.mu_stat), "juhasz: mu must lie in [0, 2]");
                   require(positive(m.v_st), "juhasz: v_st must be > 0");
                 },
             },
             model);
}

std::string name_of(const NormalModelParams& model) {
  return std::visit(overloaded{
                        [](const Linear&) { return "linear"; },
                        [](const WojtyraDamping&) { return "wojtyra"; },
                        [](const McLean&) { return "mclean"; },
                        [](const Jackson&) { return "jackson"; },
                        [](const ParkKwon&) { return "parkkwon"; },
                        [](const Millard&) { return "millard"; },
                        [](const TanBarrier&) { return "tanbarrier"; },
                    },
                    model);
}

std::string name_of(const FrictionModelParams& model) {
  return std::visit(overloaded{
                        [](const SignCoulomb&) { return "sign-coulomb"; },
                        [](const PseudoCoulomb&) { return "pseudo-coulomb"; },
                        [](const Juhasz&) { return "juhasz"; },
                    },
                    model);
}

double raw_normal_force(const NormalModelParams& model, const ContactPointState& cp) {
  const double d = cp.depth;
  const double dd = cp.depth_rate;
  return std::visit(
      overloaded{
          [&](const Linear& m) { return m.k_z * d + m.c_z * dd; },
          [&](const WojtyraDamping& m) {
            const double s = d / m.h;
            const double c = d <= m.h ? m.c_max * std::abs(3 * s * s - 2 * s * s * s) : m.c_max;
            return m.k_z * d + c * dd;
          },
          [&](const McLean& m) { return m.k_z * d + m.b_z * d * dd; },
          [&](const Jackson& m) { return m.k_z * d * (1.0 + m.c_z * dd); },
          [&](const ParkKwon& m) { return parkkwon_stiffness(m, d) * d * (1.0 + 1.5 * m.alpha * dd); },
          [&](const Millard& m) {
            return m.k_z * d * (1.0 + (1.0 - m.restitution) / (m.restitution * m.impact_speed) * dd);
          },
          [&](const TanBarrier& m) {
            if (d >= m.l_0) {
              throw BarrierViolation("tanbarrier: depth " + std::to_string(d) +
                                     " m reached the barrier l_0 = " + std::to_string(m.l_0) + " m");
            }
            return m.k_z * std::tan(std::numbers::pi * d / (2.0 * m.l_0)) + m.b_z * d * dd;
          },
      },
      model);
}

double normal_force(const NormalModelParams& model, const ContactPointState& cp) {
  if (!(cp.depth >= 0.0)) throw ValidationError("normal_force: depth must be >= 0");
  if (cp.depth == 0.0) return 0.0;
  return std::max(raw_normal_force(model, cp), 0.0);
}

Vec2 friction_force(const FrictionModelParams& model, double normal, const Vec2& v_t) {
  const double speed = v_t.norm();
  if (speed == 0.0 || normal <= 0.0) return Vec2::Zero();
  const Vec2 dir = -v_t / speed;
  const double magnitude = std::visit(
      overloaded{
          [&](const SignCoulomb& m) { return (speed <= m.v_threshold ? m.mu_low : m.mu_high) * normal; },
          [&](const PseudoCoulomb& m) {
            return 2.0 / std::numbers::pi * std::atan(speed / m.lambda) * m.mu * normal;
          },
          [&](const Juhasz& m) {
            return speed <= m.v_st ? m.mu_dyn * normal : speed / m.v_st * m.mu_stat * normal;
          },
      },
      model);
  return magnitude * dir;
}

double static_penetration(const NormalModelParams& model, double load) {
  if (!(load >= 0.0)) throw ValidationError("static_penetration: load must be >= 0");
  return std::visit(
      overloaded{
          [&](const Linear& m) { return load / m.k_z; },
          [&](const McLean& m) { return load / m.k_z; },
          [&](const Jackson& m) { return load / m.k_z; },
          [&](const TanBarrier& m) { return 2.0 * m.l_0 / std::numbers::pi * std::atan(load / m.k_z); },
          [&](const auto& m) -> double {
            throw ValidationError("static_penetration: unsupported model '" +
                                  name_of(NormalModelParams(m)) + "'");
          },
      },
      model);
}

double elastic_energy(const NormalModelParams& model, double d) {
  if (d <= 0.0) return 0.0;
  return std::visit(
      overloaded{
          [&](const TanBarrier& m) {
            return -2.0 * m.l_0 * m.k_z / std::numbers::pi *
                   std::log(std::cos(std::numbers::pi * d / (2.0 * m.l_0)));
          },
          [&](const ParkKwon& m) {
            if (!m.stiffness) return 0.5 * m.k_z * d * d;
            // Trapezoid on a fixed grid; only used for energy bookkeeping.
            constexpr int n = 64;
            double e = 0.0;
            for (int i = 0; i < n; ++i) {
              const double a = d * i / n, b = d * (i + 1) / n;
              e += 0.5 * (m.stiffness(a) * a + m.stiffness(b) * b) * (b - a);
            }
            return e;
          },
          [&](const auto& m) { return 0.5 * m.k_z * d * d; },
      },
      model);
}

double small_deflection_stiffness(const NormalModelParams& model) {
  return std::visit(
      overloaded{
          [](const TanBarrier& m) { return m.k_z * std::numbers::pi / (2.0 * m.l_0); },
          [](const ParkKwon& m) { return m.stiffness ? m.stiffness(0.0) : m.k_z; },
          [](const auto& m) { return m.k_z; },
      },
      model);
}

double penetration_limit(const NormalModelParams& model) {
  if (const auto* t = std::get_if<TanBarrier>(&model)) return t->l_0;
  return std::numeric_limits<double>::infinity();
}

Vec2 parkkwon_tangential_force(double alpha, double k_x, double k_s, const Vec2& displacement,
                               const Vec2& velocity) {
  return -1.5 * alpha * k_x * displacement.cwiseAbs().cwiseProduct(velocity) - k_s * displacement;
}

std::vector<std::string> normal_model_names() {
  return {"linear", "wojtyra", "mclean", "jackson", "parkkwon", "millard", "tanbarrier"};
}

std::vector<std::string> parameter_set_names() { return {"fig5-consistent", "table1-raw"}; }

NormalModelParams normal_preset(const std::string& model, const std::string& set) {
  if (set != "fig5-consistent" && set != "table1-raw") {
    throw ValidationError("unknown parameter set '" + set + "'");
  }
  // McLean's published coefficients; the other surveyed laws share its
  // stiffness so all of them carry a 10 kg load at about 0.84 mm.
  constexpr double k = 1.17e5;
  if (model == "linear") return Linear{k, 1.0e3};
  if (model == "wojtyra") return WojtyraDamping{k, 2.0e3, 1.0e-3};
  if (model == "mclean") return McLean{k, 2.8e6};
  if (model == "jackson") return Jackson{k, 10.0};
  if (model == "parkkwon") return ParkKwon{16.0, k, {}};
  if (model == "millard") return Millard{k, 0.5, 0.5};
  if (model == "tanbarrier") {
    if (set == "table1-raw") return TanBarrier{1.0e5, 3.0e5, 0.002};
    return TanBarrier{135.0, 4.0e6, 0.002};
  }
  std::string names;
  for (const auto& n : normal_model_names()) names += " " + n;
  throw ValidationError("unknown normal model '" + model + "'; catalog:" + names);
}

NormalModelParams normal_from_json(const std::string& model, const nlohmann::json& j) {
  auto get = [&](const char* key) {
    if (!j.contains(key)) throw ValidationError(model + ": missing coefficient '" + key + "'");
    return j.at(key).get<double>();
  };
  NormalModelParams out;
  if (model == "linear") out = Linear{get("k_z"), get("c_z")};
  else if (model == "wojtyra") out = WojtyraDamping{get("k_z"), get("c_max"), get("h")};
  else if (model == "mclean") out = McLean{get("k_z"), get("b_z")};
  else if (model == "jackson") out = Jackson{get("k_z"), get("c_z")};
  else if (model == "parkkwon") out = ParkKwon{get("alpha"), get("k_z"), {}};
  else if (model == "millard") out = Millard{get("k_z"), get("restitution"), get("impact_speed")};
  else if (model == "tanbarrier") out = TanBarrier{get("k_z"), get("b_z"), get("l_0")};
  else throw ValidationError("unknown normal model '" + model + "'");
  validate(out);
  return out;
}

nlohmann::json normal_to_json(const NormalModelParams& model) {
  return std::visit(
      overloaded{
          [](const Linear& m) { return nlohmann::json{{"k_z", m.k_z}, {"c_z", m.c_z}}; },
          [](const WojtyraDamping& m) {
            return nlohmann::json{{"k_z", m.k_z}, {"c_max", m.c_max}, {"h", m.h}};
          },
          [](const McLean& m) { return nlohmann::json{{"k_z", m.k_z}, {"b_z", m.b_z}}; },
          [](const Jackson& m) { return nlohmann::json{{"k_z", m.k_z}, {"c_z", m.c_z}}; },
          [](const ParkKwon& m) { return nlohmann::json{{"alpha", m.alpha}, {"k_z", m.k_z}}; },
          [](const Millard& m) {
            return nlohmann::json{{"k_z", m.k_z}, {"restitution", m.restitution}, {"impact_speed", m.impact_speed}};
          },
          [](const TanBarrier& m) { return nlohmann::json{{"k_z", m.k_z}, {"b_z", m.b_z}, {"l_0", m.l_0}}; },
      },
      model);
}

FrictionModelParams friction_from_json(const std::string& model, const nlohmann::json& j) {
  FrictionModelParams out;
  if (model == "sign-coulomb") {
    out = SignCoulomb{j.value("mu_low", 0.8), j.value("mu_high", 0.2), j.value("v_threshold", 0.05)};
  } else if (model == "pseudo-coulomb") {
    out = PseudoCoulomb{j.value("mu", 0.8), j.value("lambda", 0.01)};
  } else if (model == "juhasz") {
    out = Juhasz{j.at("mu_dyn").get<double>(), j.at("mu_stat").get<double>(), j.at("v_st").get<double>()};
  } else {
    throw ValidationError("unknown friction model '" + model + "'");
  }
  validate(out);
  return out;
}

nlohmann::json friction_to_json(const FrictionModelParams& model) {
  return std::visit(
      overloaded{
          [](const SignCoulomb& m) {
            return nlohmann::json{{"mu_low", m.mu_low}, {"mu_high", m.mu_high}, {"v_threshold", m.v_threshold}};
          },
          [](const PseudoCoulomb& m) { return nlohmann::json{{"mu", m.mu}, {"lambda", m.lambda}}; },
          [](const Juhasz& m) {
            return nlohmann::json{{"mu_dyn", m.mu_dyn}, {"mu_stat", m.mu_stat}, {"v_st", m.v_st}};
          },
      },
      model);
}

FootContact foot_contact_wrench(const Pose& pose, const Vec3& angular, const Vec3& linear,
                                std::span<const Vec3> points, const Vec3& reference,
                                double ground_height, const NormalModelParams& normal,
                                const std::optional<FrictionModelParams>& friction) {
  FootContact out;
  out.wrench.point = pose.apply(reference);
  out.points.reserve(points.size());
  for (const Vec3& local : points) {
    PointContact pc;
    pc.position = pose.apply(local);
    pc.depth = ground_height - pc.position.z();
    if (pc.depth > 0.0) {
      const Vec3 v = linear + angular.cross(pc.position - pose.translation);
      ContactPointState cp{pc.depth, -v.z(), Vec2(v.x(), v.y())};
      pc.normal = normal_force(normal, cp);
      if (friction) pc.friction = friction_force(*friction, pc.normal, cp.tangential_velocity);
      const Vec3 f(pc.friction.x(), pc.friction.y(), pc.normal);
      out.wrench.force += f;
      out.wrench.moment += (pc.position - out.wrench.point).cross(f);
      out.in_contact = true;
    } else {
      pc.depth = 0.0;
    }
    out.points.push_back(pc);
  }
  return out;
}

std::vector<Vec3> rectangular_sole(double length, double width, double depth) {
  std::vector<Vec3> pts;
  for (double sx : {1.0, -1.0}) {
    for (double sy : {1.0, -1.0}) pts.emplace_back(sx * length / 2, sy * width / 2, -depth);
  }
  return pts;
}

}  // namespace contactdyn::contact
