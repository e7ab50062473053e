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

#include "contactdyn/gait.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "contactdyn/csv.hpp"
#include "contactdyn/errors.hpp"
#include "contactdyn/model_io.hpp"

namespace contactdyn::gait {

namespace {

using kinetree::RigidBodyTree;

const model_io::SurenaGeometry kGeom;

double smooth(double s) { return s * s * s * (10.0 + s * (-15.0 + 6.0 * s)); }  // quintic, zero rate and accel at ends
double cosine_blend(double s) { return 0.5 - 0.5 * std::cos(std::numbers::pi * s); }
double bump(double s) { return 64.0 * std::pow(s * (1.0 - s), 3); }  // peak 1 at s = 0.5

// Solves a x_{i-1} + (1 - 2a) x_i + a x_{i+1} = p_i with x fixed at both ends.
std::vector<double> lipm_com(const std::vector<double>& p, double zc, double h) {
  const std::size_t n = p.size();
  std::vector<double> x(p);
  if (n < 3) return x;
  const double a = -zc / (9.81 * h * h);
  const double b = 1.0 - 2.0 * a;
  // Thomas algorithm on the interior unknowns.
  std::vector<double> c(n, 0.0), d(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    double rhs = p[i];
    if (i == 1) rhs -= a * x[0];
    if (i + 2 == n) rhs -= a * x[n - 1];
    const double denom = i == 1 ? b : b - a * c[i - 1];
    c[i] = a / denom;
    d[i] = i == 1 ? rhs / denom : (rhs - a * d[i - 1]) / denom;
  }
  x[n - 2] = d[n - 2];
  for (std::size_t i = n - 2; i-- > 1;) x[i] = d[i] - c[i] * x[i + 1];
  return x;
}

struct Plan {
  std::vector<double> t;
  std::vector<Vec3> left, right;  // sole centres
  std::vector<Vec2> zmp;
  std::vector<Phase> phase;
  std::vector<Stance> stance;
};

// Fill q for a level pelvis at `pelvis` with both soles placed.
VecX whole_body(const RigidBodyTree& tree, const Vec3& pelvis, const Vec3& lf, const Vec3& rf) {
  VecX q = VecX::Zero(tree.dof());
  q.head<3>() = pelvis;
  const int nb = tree.num_base();
  q.segment<6>(nb + tree.actuated_index("l_hip_yaw")) = leg_ik(pelvis, lf, true);
  q.segment<6>(nb + tree.actuated_index("r_hip_yaw")) = leg_ik(pelvis, rf, false);
  return q;
}

// Moves the pelvis horizontally until the whole-body COM is over `com_xy`.
VecX place_com(const RigidBodyTree& tree, const Vec2& com_xy, double height, const Vec3& lf, const Vec3& rf,
               Vec3& pelvis) {
  pelvis.z() = height;
  VecX q;
  for (int it = 0; it < 50; ++it) {
    q = whole_body(tree, pelvis, lf, rf);
    const Vec2 err = com_xy - kinetree::com(tree, q).head<2>();
    pelvis.head<2>() += err;
    if (err.norm() < 1e-12) break;
  }
  return whole_body(tree, pelvis, lf, rf);
}

void check_surena(const RigidBodyTree& tree) {
  if (!tree.floating() || tree.contact_group_index("lf") < 0) {
    throw ValidationError("gait generator needs the surena-lower model");
  }
  tree.actuated_index("l_hip_yaw");
  tree.actuated_index("r_hip_yaw");
}

Trajectory finish(const RigidBodyTree& tree, const Plan& plan, double h, double output_rate, double height) {
  const std::size_t n = plan.t.size();
  std::vector<double> px(n), py(n);
  for (std::size_t i = 0; i < n; ++i) {
    px[i] = plan.zmp[i].x();
    py[i] = plan.zmp[i].y();
  }
  // COM height of the nominal stance, for the pendulum constant.
  Vec3 pelvis(0, 0, height);
  const VecX q0 = place_com(tree, plan.zmp[0], height, plan.left[0], plan.right[0], pelvis);
  const double zc = kinetree::com(tree, q0).z();
  const auto cx = lipm_com(px, zc, h);
  const auto cy = lipm_com(py, zc, h);

  std::vector<VecX> q(n);
  for (std::size_t i = 0; i < n; ++i) {
    q[i] = place_com(tree, Vec2(cx[i], cy[i]), height, plan.left[i], plan.right[i], pelvis);
  }
  const int stride = std::max(1, static_cast<int>(std::lround(1.0 / (h * output_rate))));
  Trajectory traj;
  for (std::size_t i = 0; i < n; i += stride) {
    Sample s;
    s.t = plan.t[i];
    s.q = q[i];
    if (i == 0 || i + 1 == n) {
      s.qd = VecX::Zero(q[i].size());
      s.qdd = VecX::Zero(q[i].size());
    } else {
      s.qd = (q[i + 1] - q[i - 1]) / (2 * h);
      s.qdd = (q[i + 1] - 2 * q[i] + q[i - 1]) / (h * h);
    }
    s.phase = plan.phase[i];
    s.stance = plan.stance[i];
    traj.samples.push_back(std::move(s));
  }
  return traj;
}

}  // namespace

std::string to_string(Phase p) { return p == Phase::Ssp ? "ssp" : "dsp"; }

std::string to_string(Stance s) {
  switch (s) {
    case Stance::Left: return "lf";
    case Stance::Right: return "rf";
    default: return "both";
  }
}

Phase parse_phase(const std::string& s) {
  if (s == "ssp") return Phase::Ssp;
  if (s == "dsp") return Phase::Dsp;
  throw DataError("unknown phase '" + s + "'");
}

Stance parse_stance(const std::string& s) {
  if (s == "lf") return Stance::Left;
  if (s == "rf") return Stance::Right;
  if (s == "both") return Stance::Both;
  throw DataError("unknown stance '" + s + "'");
}

void Trajectory::interpolate(double t, VecX& q, VecX& qd) const {
  if (samples.empty()) throw DataError("empty trajectory");
  if (t <= samples.front().t) {
    q = samples.front().q;
    qd = samples.front().qd;
    return;
  }
  if (t >= samples.back().t) {
    q = samples.back().q;
    qd = samples.back().qd;
    return;
  }
  const auto it = std::upper_bound(samples.begin(), samples.end(), t,
                                   [](double v, const Sample& s) { return v < s.t; });
  const Sample& b = *it;
  const Sample& a = *(it - 1);
  const double w = (t - a.t) / (b.t - a.t);
  q = (1 - w) * a.q + w * b.q;
  qd = (1 - w) * a.qd + w * b.qd;
}

Trajectory read_csv(const std::filesystem::path& path, int expected_dof) {
  const auto table = csv::read(path);
  int n = 0;
  while (std::find(table.header.begin(), table.header.end(), "q_" + std::to_string(n)) != table.header.end()) ++n;
  if (n == 0) throw DataError(path.string() + ": no q_* columns");
  if (expected_dof >= 0 && n != expected_dof) {
    throw DataError(path.string() + ": trajectory has " + std::to_string(n) + " coordinates, model has " +
                    std::to_string(expected_dof));
  }
  const int ct = table.column("t");
  std::vector<int> cq(n), cqd(n), cqdd(n);
  for (int i = 0; i < n; ++i) {
    cq[i] = table.column("q_" + std::to_string(i));
    cqd[i] = table.column("qd_" + std::to_string(i));
    cqdd[i] = table.column("qdd_" + std::to_string(i));
  }
  const int cphase = table.column("phase");
  const int cstance = table.column("stance");
  Trajectory traj;
  traj.samples.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    Sample s;
    s.t = table.number(r, ct);
    s.q.resize(n);
    s.qd.resize(n);
    s.qdd.resize(n);
    for (int i = 0; i < n; ++i) {
      s.q[i] = table.number(r, cq[i]);
      s.qd[i] = table.number(r, cqd[i]);
      s.qdd[i] = table.number(r, cqdd[i]);
    }
    s.phase = parse_phase(table.rows[r][cphase]);
    s.stance = parse_stance(table.rows[r][cstance]);
    if (!traj.samples.empty() && !(s.t > traj.samples.back().t)) {
      throw DataError(path.string() + ": time column must increase (row " + std::to_string(r + 1) + ")");
    }
    if (!s.q.allFinite() || !s.qd.allFinite() || !s.qdd.allFinite()) {
      throw DataError(path.string() + ": non-finite value in row " + std::to_string(r + 1));
    }
    traj.samples.push_back(std::move(s));
  }
  if (traj.samples.empty()) throw DataError(path.string() + ": no samples");
  return traj;
}

std::vector<ScheduleEntry> read_schedule(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  const int ct = table.column("t");
  const int cphase = table.column("phase");
  const int cstance = table.column("stance");
  std::vector<ScheduleEntry> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    out.push_back({table.number(r, ct), parse_phase(table.rows[r][cphase]), parse_stance(table.rows[r][cstance])});
  }
  if (out.empty()) throw DataError(path.string() + ": empty schedule");
  return out;
}

void apply_schedule(Trajectory& traj, const std::vector<ScheduleEntry>& schedule) {
  if (schedule.size() != traj.samples.size()) {
    throw DataError("schedule has " + std::to_string(schedule.size()) + " rows, trajectory has " +
                    std::to_string(traj.samples.size()));
  }
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const auto& e = schedule[i];
    if (std::abs(e.t - traj.samples[i].t) > 1e-9) {
      throw DataError("schedule row " + std::to_string(i + 1) + " is at t = " + std::to_string(e.t) +
                      ", trajectory sample at t = " + std::to_string(traj.samples[i].t));
    }
    if ((e.phase == Phase::Dsp) != (e.stance == Stance::Both)) {
      throw DataError("schedule row " + std::to_string(i + 1) + ": phase " + to_string(e.phase) +
                      " conflicts with stance " + to_string(e.stance));
    }
  }
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    traj.samples[i].phase = schedule[i].phase;
    traj.samples[i].stance = schedule[i].stance;
  }
}

void write_csv(const std::filesystem::path& path, const Trajectory& traj) {
  const int n = traj.dof();
  std::vector<std::string> header{"t"};
  for (const char* prefix : {"q_", "qd_", "qdd_"}) {
    for (int i = 0; i < n; ++i) header.push_back(prefix + std::to_string(i));
  }
  header.push_back("phase");
  header.push_back("stance");
  csv::Writer w(path, "units: t s; q rad or m; qd rad/s or m/s; qdd rad/s^2 or m/s^2", header);
  for (const auto& s : traj.samples) {
    std::vector<std::string> cells{csv::format(s.t)};
    for (const VecX* v : {&s.q, &s.qd, &s.qdd}) {
      for (int i = 0; i < n; ++i) cells.push_back(csv::format((*v)[i]));
    }
    cells.push_back(to_string(s.phase));
    cells.push_back(to_string(s.stance));
    w.row(cells);
  }
}

Eigen::Matrix<double, 6, 1> leg_ik(const Vec3& pelvis, const Vec3& sole, bool left) {
  const double sign = left ? 1.0 : -1.0;
  const Vec3 hip = pelvis + Vec3(0.0, sign * kGeom.hip_spacing / 2, -kGeom.hip_drop);
  const Vec3 ankle = sole + Vec3(0.0, 0.0, kGeom.ankle_height);
  const Vec3 r = ankle - hip;
  const double l1 = kGeom.thigh_length, l2 = kGeom.shank_length;

  const double roll = std::atan2(r.y(), -r.z());
  const double zp = -std::hypot(r.y(), r.z());
  const double reach2 = r.x() * r.x() + zp * zp;
  const double c2 = (reach2 - l1 * l1 - l2 * l2) / (2 * l1 * l2);
  if (c2 > 1.0 || c2 < -1.0) throw ValidationError("leg_ik: target out of reach");
  const double knee = std::acos(c2);
  const double hip_pitch = std::atan2(-r.x(), -zp) - std::atan2(l2 * std::sin(knee), l1 + l2 * std::cos(knee));

  Eigen::Matrix<double, 6, 1> out;
  out << 0.0, roll, hip_pitch, knee, -(hip_pitch + knee), -roll;
  return out;
}

Trajectory generate_walk(const RigidBodyTree& tree, const WalkPattern& p) {
  check_surena(tree);
  if (p.steps < 1 || !(p.ssp > 0) || !(p.dsp > 0) || !(p.speed_kmh > 0)) {
    throw ValidationError("generate_walk: invalid pattern");
  }
  const double h = 1.0 / p.grid_rate;
  const double cycle = p.ssp + p.dsp;
  // Body advances one half-stride per step.
  const double half = p.speed_kmh / 3.6 * cycle;
  const double y = kGeom.hip_spacing / 2;
  const double t_walk = p.initial_hold;
  const double t_end = t_walk + p.steps * cycle + p.final_hold;

  // Sole x positions before each step; the right foot swings first and
  // lands one half-stride ahead of the stance foot, the last step closes up.
  std::vector<double> lx{0.0}, rx{0.0};
  for (int k = 0; k < p.steps; ++k) {
    const bool right_swing = k % 2 == 0;
    auto& swing = right_swing ? rx : lx;
    auto& stance = right_swing ? lx : rx;
    const double from = stance.back();
    swing.push_back(k + 1 == p.steps ? from : from + half);
    stance.push_back(from);
  }

  auto foot_center = [&](bool left, int step_index) {
    return Vec2(left ? lx[step_index] : rx[step_index], left ? y : -y);
  };

  Plan plan;
  const long n = std::lround(t_end / h) + 1;
  for (long i = 0; i < n; ++i) {
    const double t = i * h;
    Vec3 lf(lx.front(), y, 0.0), rf(rx.front(), -y, 0.0);
    Vec2 zmp = Vec2(0.5 * (lx.front() + rx.front()), 0.0);
    Phase phase = Phase::Dsp;
    Stance stance = Stance::Both;

    if (t < t_walk) {
      const double s = std::clamp((t - (t_walk - p.dsp)) / p.dsp, 0.0, 1.0);
      zmp = (1 - cosine_blend(s)) * zmp + cosine_blend(s) * foot_center(true, 0);
    } else {
      const int k = std::min(p.steps - 1, static_cast<int>((t - t_walk) / cycle));
      const double tk = t - t_walk - k * cycle;
      const bool right_swing = k % 2 == 0;
      const bool left_stance = right_swing;
      const Vec3 l0(lx[k], y, 0.0), l1(lx[k + 1], y, 0.0);
      const Vec3 r0(rx[k], -y, 0.0), r1(rx[k + 1], -y, 0.0);
      if (tk < p.ssp) {
        const double s = tk / p.ssp;
        const Vec3& a = right_swing ? r0 : l0;
        const Vec3& b = right_swing ? r1 : l1;
        Vec3 swing = a + smooth(s) * (b - a);
        swing.z() = p.swing_height * bump(s);
        lf = right_swing ? l0 : swing;
        rf = right_swing ? swing : r0;
        zmp = foot_center(left_stance, k);
        phase = Phase::Ssp;
        stance = left_stance ? Stance::Left : Stance::Right;
      } else {
        lf = l1;
        rf = r1;
        const Vec2 from = foot_center(left_stance, k);
        Vec2 to;
        if (k + 1 < p.steps) {
          to = foot_center(!left_stance, k + 1);
        } else {
          to = Vec2(0.5 * (lx.back() + rx.back()), 0.0);
        }
        const double s = std::clamp((tk - p.ssp) / p.dsp, 0.0, 1.0);
        zmp = from + cosine_blend(s) * (to - from);
      }
    }
    plan.t.push_back(t);
    plan.left.push_back(lf);
    plan.right.push_back(rf);
    plan.zmp.push_back(zmp);
    plan.phase.push_back(phase);
    plan.stance.push_back(stance);
  }
  return finish(tree, plan, h, p.output_rate, p.pelvis_height);
}

Trajectory generate_stand(const RigidBodyTree& tree, double duration, double pelvis_height, double output_rate) {
  check_surena(tree);
  const double h = 1e-3;
  const double y = kGeom.hip_spacing / 2;
  Plan plan;
  const long n = std::lround(duration / h) + 1;
  for (long i = 0; i < n; ++i) {
    plan.t.push_back(i * h);
    plan.left.emplace_back(0.0, y, 0.0);
    plan.right.emplace_back(0.0, -y, 0.0);
    plan.zmp.emplace_back(0.0, 0.0);
    plan.phase.push_back(Phase::Dsp);
    plan.stance.push_back(Stance::Both);
  }
  return finish(tree, plan, h, output_rate, pelvis_height);
}

}  // namespace contactdyn::gait
