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

// Compliant point-contact force laws.
//
// Sign convention: every law takes the penetration depth d >= 0 and its rate
// d_dot (positive while sinking). The original literature writes these with a
// deflection dz = -d and rate dz_dot = -d_dot; the table below shows both.
//
//   Linear       F = -k dz - c dz_dot                 = k d + c d_dot
//   Wojtyra      Linear with c(d) = c_max |3(d/h)^2 - 2(d/h)^3|, d <= h
//                                   c_max,                        d > h
//   McLean       F = -k dz - b |dz| dz_dot            = k d + b d d_dot
//   Jackson      F = -k dz (1 + c dz_dot)   read as     k d (1 + c d_dot)
//   ParkKwon     F = -1.5 a k(dz)|dz| dz_dot - k(dz) dz = k(d) d (1 + 1.5 a d_dot)
//   Millard      F = -k dz (1 + (1-e)/(e dz0_dot) dz_dot) = k d (1 + (1-e)/(e v0) d_dot)
//                with v0 = -dz0_dot > 0 the impact speed
//   TanBarrier   F = -k tan(pi dz / 2 l0) - b |dz| dz_dot = k tan(pi d / 2 l0) + b d d_dot
//
// Jackson's published form is sign-ambiguous; it is implemented in the
// dissipative orientation. Wojtyra's depth threshold is applied to d.
// Every law is clamped to F >= 0 so the ground never pulls.

#ifndef CONTACTDYN_CONTACT_MODELS_HPP_
#define CONTACTDYN_CONTACT_MODELS_HPP_

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "contactdyn/types.hpp"
#include "contactdyn/wrench.hpp"
#include "json.hpp"

namespace contactdyn::contact {

struct Linear {
  double k_z;  // N/m
  double c_z;  // N s/m
};
struct WojtyraDamping {
  double k_z;    // N/m
  double c_max;  // N s/m
  double h;      // m
};
struct McLean {
  double k_z;  // N/m
  double b_z;  // N s/m^2
};
struct Jackson {
  double k_z;  // N/m
  double c_z;  // s/m
};
struct ParkKwon {
  double alpha;  // s/m
  double k_z;    // N/m, used when no profile is supplied
  // Optional depth-dependent stiffness k(d); must be positive and monotone.
  std::function<double(double)> stiffness;
};
struct Millard {
  double k_z;          // N/m
  double restitution;  // (0, 1]
  double impact_speed; // m/s, > 0
};
struct TanBarrier {
  double k_z;  // N
  double b_z;  // N s/m^2
  double l_0;  // m, maximum penetration
};

using NormalModelParams =
    std::variant<Linear, WojtyraDamping, McLean, Jackson, ParkKwon, Millard, TanBarrier>;

// mu = mu_low for speed <= v_threshold, mu_high above; discontinuous.
struct SignCoulomb {
  double mu_low = 0.8;
  double mu_high = 0.2;
  double v_threshold = 0.05;
};
struct PseudoCoulomb {
  double mu = 0.8;
  double lambda = 0.01;  // m/s
};
// Magnitude mu_dyn F_N for speed <= v_st, (speed / v_st) mu_stat F_N above
// (the branch assignment follows the published form verbatim).
struct Juhasz {
  double mu_dyn;
  double mu_stat;
  double v_st;
};

using FrictionModelParams = std::variant<SignCoulomb, PseudoCoulomb, Juhasz>;

struct ContactPointState {
  double depth = 0.0;       // m, >= 0
  double depth_rate = 0.0;  // m/s, positive while sinking
  Vec2 tangential_velocity = Vec2::Zero();
};

// Throws ValidationError when a coefficient is out of range.
void validate(const NormalModelParams& model);
void validate(const FrictionModelParams& model);

std::string name_of(const NormalModelParams& model);
std::string name_of(const FrictionModelParams& model);

// Law as written, before the unilateral clamp.
double raw_normal_force(const NormalModelParams& model, const ContactPointState& cp);

// Clamped normal force; exactly 0 at d == 0. TanBarrier with d >= l_0 throws
// BarrierViolation.
double normal_force(const NormalModelParams& model, const ContactPointState& cp);

// Opposes v_t; zero vector at v_t == 0 or F_N == 0.
Vec2 friction_force(const FrictionModelParams& model, double normal, const Vec2& v_t);

// Depth at which the static (d_dot = 0) normal force equals `load`.
// Supported for Linear, McLean, Jackson and TanBarrier.
double static_penetration(const NormalModelParams& model, double load);

// Energy stored in the elastic part of the law at depth d (antiderivative of
// the d_dot = 0 force).
double elastic_energy(const NormalModelParams& model, double depth);

// Slope dF/dd at d = 0 of the elastic part; drives the time-step rule.
double small_deflection_stiffness(const NormalModelParams& model);

// Maximum admissible penetration (l_0 for TanBarrier, +inf otherwise).
double penetration_limit(const NormalModelParams& model);

// Horizontal spring-damper of Park and Kwon, kept for completeness; it does
// not depend on the normal load and is not used by any simulation preset.
Vec2 parkkwon_tangential_force(double alpha, double k_x, double k_s, const Vec2& displacement,
                               const Vec2& velocity);

// Catalog -----------------------------------------------------------------

// Normal-law names accepted on the command line, in catalog order.
std::vector<std::string> normal_model_names();

// Parameter sets: "fig5-consistent" (default) and "table1-raw".
std::vector<std::string> parameter_set_names();
NormalModelParams normal_preset(const std::string& model, const std::string& parameter_set);

NormalModelParams normal_from_json(const std::string& model, const nlohmann::json& j);
nlohmann::json normal_to_json(const NormalModelParams& model);
FrictionModelParams friction_from_json(const std::string& model, const nlohmann::json& j);
nlohmann::json friction_to_json(const FrictionModelParams& model);

// Per-point aggregation ----------------------------------------------------

struct PointContact {
  Vec3 position = Vec3::Zero();  // world
  double depth = 0.0;
  double normal = 0.0;
  Vec2 friction = Vec2::Zero();
};

struct FootContact {
  ContactWrench wrench;
  std::vector<PointContact> points;
  bool in_contact = false;
};

// Sum per-point normal and friction forces of a rigid foot into one wrench at
// `reference` (link frame). `angular` and `linear` are the world angular
// velocity and the world velocity of the link frame origin.
FootContact foot_contact_wrench(const Pose& pose, const Vec3& angular, const Vec3& linear,
                                std::span<const Vec3> points, const Vec3& reference,
                                double ground_height, const NormalModelParams& normal,
                                const std::optional<FrictionModelParams>& friction);

// Corners of a rectangular sole centred under the link origin at `depth`.
std::vector<Vec3> rectangular_sole(double length, double width, double depth);

}  // namespace contactdyn::contact

#endif  // CONTACTDYN_CONTACT_MODELS_HPP_
