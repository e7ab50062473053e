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

#ifndef CONTACTDYN_GAIT_HPP_
#define CONTACTDYN_GAIT_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "contactdyn/kinetree.hpp"

namespace contactdyn::gait {

enum class Phase { Ssp, Dsp };
enum class Stance { Left, Right, Both };

std::string to_string(Phase p);
std::string to_string(Stance s);
Phase parse_phase(const std::string& s);    // "ssp" | "dsp"
Stance parse_stance(const std::string& s);  // "lf" | "rf" | "both"

struct Sample {
  double t = 0.0;
  VecX q, qd, qdd;
  Phase phase = Phase::Dsp;
  Stance stance = Stance::Both;
};

// Time-ordered joint-space trajectory over all generalized coordinates.
struct Trajectory {
  std::vector<Sample> samples;

  int dof() const { return samples.empty() ? 0 : static_cast<int>(samples.front().q.size()); }
  double duration() const { return samples.empty() ? 0.0 : samples.back().t - samples.front().t; }
  // Linear interpolation of q and qd, clamped to the end samples.
  void interpolate(double t, VecX& q, VecX& qd) const;
};

// Columns t, q_i, qd_i, qdd_i, phase, stance; '#' units line first.
Trajectory read_csv(const std::filesystem::path& path, int expected_dof = -1);
void write_csv(const std::filesystem::path& path, const Trajectory& traj);

// Phase labels supplied separately from a trajectory (columns t, phase, stance).
struct ScheduleEntry {
  double t = 0.0;
  Phase phase = Phase::Dsp;
  Stance stance = Stance::Both;
};

std::vector<ScheduleEntry> read_schedule(const std::filesystem::path& path);
// Replaces the labels of `traj`. Lengths and times must match; SSP needs a
// single stance foot and DSP needs both.
void apply_schedule(Trajectory& traj, const std::vector<ScheduleEntry>& schedule);

struct WalkPattern {
  double speed_kmh = 0.5;
  double initial_hold = 2.0;  // s, double support before the first step
  int steps = 6;
  double ssp = 0.8;           // s
  double dsp = 0.3;           // s
  double final_hold = 1.5;    // s
  double swing_height = 0.04; // m
  double pelvis_height = 0.86;  // m above the ground
  double output_rate = 200.0;   // Hz
  double grid_rate = 1000.0;    // Hz, internal planning grid
};

// Flat-ground walk for the surena-lower preset: ZMP reference through the
// stance feet, COM from the linear inverted pendulum, legs by analytic IK.
Trajectory generate_walk(const kinetree::RigidBodyTree& surena, const WalkPattern& pattern = {});

// Double-support stance with the COM centred between the feet.
Trajectory generate_stand(const kinetree::RigidBodyTree& surena, double duration = 2.0,
                          double pelvis_height = 0.86, double output_rate = 200.0);

// Leg joint angles (hip yaw, hip roll, hip pitch, knee, ankle pitch, ankle roll)
// placing a flat, unrotated sole centre at `sole` for a level pelvis at `pelvis`.
Eigen::Matrix<double, 6, 1> leg_ik(const Vec3& pelvis, const Vec3& sole, bool left);

}  // namespace contactdyn::gait

#endif  // CONTACTDYN_GAIT_HPP_
