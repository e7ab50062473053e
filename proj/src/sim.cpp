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

#include "contactdyn/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Cholesky>

#include "contactdyn/errors.hpp"
#include "contactdyn/model_io.hpp"
#include "contactdyn/rigid_contact.hpp"

namespace contactdyn::sim {

namespace {

void warn(std::vector<std::string>* sink, std::string msg) {
  if (sink && sink->size() < kMaxWarnings) sink->push_back(std::move(msg));
}

VecX actuated_torques(const Scenario& sc, const GeneralizedState& s) {
  const auto& tree = *sc.tree;
  if (!sc.controller) return VecX::Zero(tree.num_actuated());
  VecX q_ref(tree.num_actuated()), qd_ref(tree.num_actuated());
  sc.controller->reference(s.t, q_ref, qd_ref);
  if (sc.controller->feedback) sc.controller->feedback(s, q_ref, qd_ref);
  VecX tau = pd_tracking_torques(tree, s, q_ref, qd_ref, sc.controller->gains);
  if (sc.controller->feedforward) {
    VecX ff = VecX::Zero(tree.num_actuated());
    sc.controller->feedforward(s.t, ff);
    tau += ff;
  }
  return tau;
}

// Deepest penetration over all contact points at configuration q.
double max_depth(const RigidBodyTree& tree, const VecX& q, double ground) {
  const auto poses = kinetree::forward_kinematics(tree, q);
  double d = 0.0;
  for (const auto& g : tree.contact_groups()) {
    for (const Vec3& p : g.points) d = std::max(d, ground - poses[g.link].apply(p).z());
  }
  return d;
}

void record(const Scenario& sc, const GeneralizedState& s, SimTrace& trace) {
  const auto& tree = *sc.tree;
  const auto snap = evaluate_contacts(tree, s.q, s.qd, sc.contact);
  trace.t.push_back(s.t);
  trace.q.push_back(s.q);
  trace.qd.push_back(s.qd);
  trace.tau.push_back(actuated_torques(sc, s));
  std::vector<ContactWrench> w;
  std::vector<double> depth;
  std::uint32_t flags = 0;
  for (std::size_t g = 0; g < snap.groups.size(); ++g) {
    w.push_back(snap.groups[g].wrench);
    for (const auto& p : snap.groups[g].points) depth.push_back(p.depth);
    if (snap.groups[g].in_contact) flags |= 1u << g;
  }
  try {
    trace.zmp.push_back(rigid::zmp_from_wrenches(w, sc.contact.ground_height));
  } catch (const UndefinedZmp&) {
    trace.zmp.push_back(std::nullopt);
  }
  trace.wrenches.push_back(std::move(w));
  trace.depth.push_back(std::move(depth));
  trace.contact_flags.push_back(flags);
}

}  // namespace

VecX forward_dynamics(const RigidBodyTree& tree, const VecX& q, const VecX& qd, const VecX& generalized_force) {
  const MatX m = kinetree::mass_matrix(tree, q);
  Eigen::LLT<MatX> llt(m);
  if (llt.info() != Eigen::Success) throw NumericError("forward_dynamics: mass matrix is not positive definite");
  return llt.solve(generalized_force - kinetree::bias_forces(tree, q, qd));
}

ContactSnapshot evaluate_contacts(const RigidBodyTree& tree, const VecX& q, const VecX& qd,
                                  const ContactSettings& contact) {
  ContactSnapshot snap;
  snap.generalized = VecX::Zero(tree.dof());
  const auto& groups = tree.contact_groups();
  if (groups.empty()) return snap;
  const auto motion = kinetree::link_motion(tree, q, qd);
  snap.groups.reserve(groups.size());
  for (const auto& g : groups) {
    const auto& lm = motion[g.link];
    auto fc = contact::foot_contact_wrench(lm.pose, lm.angular, lm.linear, g.points, g.reference,
                                           contact.ground_height, contact.normal, contact.friction);
    if (fc.in_contact) {
      const MatX j = kinetree::point_jacobian(tree, q, g.link, g.reference);
      snap.generalized += j.transpose() * fc.wrench.stacked();
    }
    snap.groups.push_back(std::move(fc));
  }
  return snap;
}

VecX pd_tracking_torques(const RigidBodyTree& tree, const GeneralizedState& state, const VecX& q_ref,
                         const VecX& qd_ref, const PdGains& gains) {
  const int na = tree.num_actuated();
  const int nb = tree.num_base();
  if (q_ref.size() != na || qd_ref.size() != na || gains.kp.size() != na || gains.kd.size() != na) {
    throw ValidationError("pd_tracking_torques: expected " + std::to_string(na) + " actuated entries");
  }
  return gains.kp.cwiseProduct(q_ref - state.q.segment(nb, na)) +
         gains.kd.cwiseProduct(qd_ref - state.qd.segment(nb, na));
}

double max_stable_dt(const RigidBodyTree& tree, const ContactSettings& contact) {
  const double k = contact::small_deflection_stiffness(contact.normal);
  double dt = std::numeric_limits<double>::infinity();
  for (const auto& g : tree.contact_groups()) {
    const double omega = std::sqrt(g.points.size() * k / tree.link(g.link).mass);
    dt = std::min(dt, 0.2 / omega);
  }
  return dt;
}

StepStats step(const Scenario& sc, GeneralizedState& state, std::vector<std::string>* warnings) {
  const auto& tree = *sc.tree;
  const double limit = contact::penetration_limit(sc.contact.normal) * (1.0 - kBarrierGuard);
  const bool barrier = std::isfinite(limit);
  StepStats stats;
  double remaining = sc.dt;
  double h = sc.dt;
  int halvings = 0;
  const VecX tau = actuated_torques(sc, state);
  while (remaining > 1e-12 * sc.dt) {
    h = std::min(h, remaining);
    const auto snap = evaluate_contacts(tree, state.q, state.qd, sc.contact);
    VecX force = snap.generalized;
    force.tail(tree.num_actuated()) += tau;
    const VecX qdd = forward_dynamics(tree, state.q, state.qd, force);
    const VecX qd_new = state.qd + h * qdd;
    const VecX q_new = state.q + h * qd_new;
    if (!q_new.allFinite() || !qd_new.allFinite()) {
      throw NumericError("step: non-finite state at t = " + std::to_string(state.t));
    }
    if (barrier && max_depth(tree, q_new, sc.contact.ground_height) >= limit) {
      ++stats.rejected;
      if (++halvings > sc.max_halvings) {
        throw NumericError("step: barrier still violated after " + std::to_string(sc.max_halvings) +
                           " halvings at t = " + std::to_string(state.t));
      }
      warn(warnings, "t = " + std::to_string(state.t) + ": barrier overshoot, retrying with dt = " +
                         std::to_string(h / 2));
      h /= 2;
      continue;
    }
    state.qdd = qdd;
    state.qd = qd_new;
    state.q = q_new;
    state.t += h;
    remaining -= h;
    ++stats.substeps;
  }
  return stats;
}

SimTrace simulate(const Scenario& sc) {
  if (!sc.tree) throw ValidationError("simulate: scenario has no model");
  const auto& tree = *sc.tree;
  kinetree::check_state(tree, sc.initial);
  contact::validate(sc.contact.normal);
  if (sc.contact.friction) contact::validate(*sc.contact.friction);
  if (!(sc.dt > 0.0) || !(sc.duration > 0.0) || sc.decimation < 1) {
    throw ValidationError("simulate: dt, duration and decimation must be positive");
  }
  const double dt_max = max_stable_dt(tree, sc.contact);
  if (sc.dt > dt_max) {
    throw ValidationError("simulate: dt = " + std::to_string(sc.dt) + " exceeds the stability bound " +
                          std::to_string(dt_max));
  }
  SimTrace trace;
  for (const auto& g : tree.contact_groups()) trace.group_names.push_back(g.name);
  GeneralizedState s = sc.initial;
  record(sc, s, trace);
  const long n = std::lround(sc.duration / sc.dt);
  for (long i = 1; i <= n; ++i) {
    const auto st = step(sc, s, &trace.warnings);
    trace.steps += st.substeps;
    trace.rejected_steps += st.rejected;
    s.t = i * sc.dt;  // keep the sample grid exact
    const bool fell = tree.floating() && s.q[2] < sc.fall_height;
    if (i % sc.decimation == 0 || i == n || fell) record(sc, s, trace);
    if (fell) {
      trace.fell = true;
      trace.fall_time = s.t;
      break;
    }
  }
  return trace;
}

BallDropSummary summarize_penetration(const std::vector<double>& t, const std::vector<double>& depth, double band) {
  BallDropSummary s;
  if (depth.empty()) return s;
  s.steady_penetration = depth.back();
  s.max_penetration = *std::max_element(depth.begin(), depth.end());
  const double tol = band * std::abs(s.steady_penetration);
  std::size_t k = depth.size();
  while (k > 0 && std::abs(depth[k - 1] - s.steady_penetration) <= tol) --k;
  s.settling_time = k < t.size() ? t[k] : t.back();
  return s;
}

BallDropResult run_ball_drop(double mass, double impact_speed, const contact::NormalModelParams& model,
                             const BallDropOptions& opt) {
  if (!(mass > 0.0) || !(impact_speed >= 0.0)) {
    throw ValidationError("run_ball_drop: mass must be > 0 and impact speed >= 0");
  }
  const auto start = std::chrono::steady_clock::now();
  const auto tree = kinetree::build_tree(model_io::ball(mass, opt.radius));
  Scenario sc;
  sc.tree = &tree;
  sc.initial = GeneralizedState::zero(tree);
  sc.initial.q[2] = opt.radius + opt.drop_height;
  sc.initial.qd[2] = -impact_speed;
  sc.contact.normal = model;
  sc.contact.friction.reset();
  sc.dt = opt.dt;
  sc.duration = opt.duration;
  sc.decimation = opt.decimation;

  BallDropResult r;
  r.trace = simulate(sc);
  std::vector<double> depth;
  depth.reserve(r.trace.size());
  for (const auto& d : r.trace.depth) depth.push_back(d.front());
  r.summary = summarize_penetration(r.trace.t, depth);
  r.summary.first_contact_force = r.trace.wrenches.front().front().force.z();
  r.summary.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

double mechanical_energy(const RigidBodyTree& tree, const GeneralizedState& s, const ContactSettings& contact) {
  const double kinetic = 0.5 * s.qd.dot(kinetree::mass_matrix(tree, s.q) * s.qd);
  const double potential = -tree.total_mass() * tree.gravity().dot(kinetree::com(tree, s.q));
  double elastic = 0.0;
  const auto poses = kinetree::forward_kinematics(tree, s.q);
  for (const auto& g : tree.contact_groups()) {
    for (const Vec3& p : g.points) {
      elastic += contact::elastic_energy(contact.normal, contact.ground_height - poses[g.link].apply(p).z());
    }
  }
  return kinetic + potential + elastic;
}

int count_sign_changes(const std::vector<double>& x, double dead_band) {
  int changes = 0;
  int last = 0;
  for (double v : x) {
    if (std::abs(v) <= dead_band) continue;
    const int s = v > 0 ? 1 : -1;
    if (last != 0 && s != last) ++changes;
    last = s;
  }
  return changes;
}

SlideResult run_sliding_block(const contact::FrictionModelParams& friction, double initial_speed, double dt,
                              double duration, double mass) {
  const auto tree = kinetree::build_tree(model_io::sliding_block(mass, 0.2, 0.2));
  Scenario sc;
  sc.tree = &tree;
  sc.contact.normal = contact::normal_preset("tanbarrier", "fig5-consistent");
  sc.contact.friction = friction;
  sc.initial = GeneralizedState::zero(tree);
  const double weight = mass * -tree.gravity().z();
  sc.initial.q[2] = -contact::static_penetration(sc.contact.normal, weight / 4);
  sc.initial.qd[0] = initial_speed;
  sc.dt = dt;
  sc.duration = duration;
  sc.decimation = 1;

  SlideResult r;
  r.trace = simulate(sc);
  r.friction_x.reserve(r.trace.size());
  for (const auto& w : r.trace.wrenches) r.friction_x.push_back(w.front().force.x());
  r.sign_changes = count_sign_changes(r.friction_x, 1e-3 * weight);
  return r;
}

}  // namespace contactdyn::sim

namespace contactdyn::sim {

PdGains default_walk_gains(const RigidBodyTree& tree) {
  const int na = tree.num_actuated();
  PdGains g{VecX::Constant(na, 1.5e4), VecX::Constant(na, 150.0)};
  return g;
}

WalkResult run_walk(const RigidBodyTree& tree, const gait::Trajectory& reference, const WalkOptions& opt) {
  if (reference.dof() != tree.dof()) {
    throw ValidationError("run_walk: reference has " + std::to_string(reference.dof()) + " coordinates, model has " +
                          std::to_string(tree.dof()));
  }
  const auto start = std::chrono::steady_clock::now();
  const int nb = tree.num_base();
  const int na = tree.num_actuated();

  Scenario sc;
  sc.tree = &tree;
  sc.contact = opt.contact;
  sc.dt = opt.dt;
  sc.decimation = opt.decimation;
  sc.duration = opt.duration > 0.0 ? opt.duration : reference.duration();
  const double t0 = reference.samples.front().t;

  // Static double stance, sunk by the per-corner static penetration.
  sc.initial = GeneralizedState::zero(tree);
  sc.initial.q = reference.samples.front().q;
  std::size_t corners = 0;
  for (const auto& g : tree.contact_groups()) corners += g.points.size();
  const double weight = tree.total_mass() * -tree.gravity().z();
  double sink = 0.0;
  try {
    sink = contact::static_penetration(sc.contact.normal, weight / static_cast<double>(corners));
  } catch (const ValidationError&) {
    sink = weight / static_cast<double>(corners) / contact::small_deflection_stiffness(sc.contact.normal);
  }
  sc.initial.q[2] -= sink;
  sc.fall_height = opt.fall_fraction * sc.initial.q[2];

  Controller ctl;
  ctl.gains = opt.gains ? *opt.gains : default_walk_gains(tree);
  ctl.reference = [&reference, t0, nb, na](double t, VecX& q_ref, VecX& qd_ref) {
    VecX q, qd;
    reference.interpolate(t0 + t, q, qd);
    q_ref = q.segment(nb, na);
    qd_ref = qd.segment(nb, na);
  };
  if (opt.posture_gain != 0.0) {
    struct Ankle {
      int group, roll, pitch;
    };
    std::vector<Ankle> ankles;
    for (const char* side : {"l", "r"}) {
      const std::string p(side);
      ankles.push_back({tree.contact_group_index(p + "f"), tree.actuated_index(p + "_ankle_roll"),
                        tree.actuated_index(p + "_ankle_pitch")});
    }
    const double gain = opt.posture_gain;
    const double ground = opt.contact.ground_height;
    ctl.feedback = [&tree, ankles, gain, ground](const GeneralizedState& s, VecX& q_ref, VecX&) {
      const auto poses = kinetree::forward_kinematics(tree, s.q);
      for (const auto& a : ankles) {
        const auto& g = tree.contact_groups()[a.group];
        bool touching = false;
        for (const Vec3& p : g.points) touching |= poses[g.link].apply(p).z() < ground;
        if (!touching) continue;
        q_ref[a.pitch] += gain * s.q[4];
        q_ref[a.roll] += gain * s.q[5];
      }
    };
  }
  if (opt.feedforward) {
    const int lf = tree.contact_group_index("lf");
    const int rf = tree.contact_group_index("rf");
    std::vector<double> times;
    std::vector<VecX> taus;
    for (const auto& smp : reference.samples) {
      const GeneralizedState st{smp.q, smp.qd, smp.qdd, smp.t};
      times.push_back(smp.t - t0);
      if (smp.stance == gait::Stance::Both) {
        taus.push_back(rigid::dsp_inverse_dynamics(tree, st, lf, rf).tau);
      } else {
        taus.push_back(rigid::ssp_inverse_dynamics(tree, st, smp.stance == gait::Stance::Left ? lf : rf).tau);
      }
    }
    ctl.feedforward = [times = std::move(times), taus = std::move(taus)](double t, VecX& tau) {
      const auto it = std::upper_bound(times.begin(), times.end(), t);
      if (it == times.begin()) {
        tau = taus.front();
      } else if (it == times.end()) {
        tau = taus.back();
      } else {
        const auto i = static_cast<std::size_t>(it - times.begin());
        const double a = (t - times[i - 1]) / (times[i] - times[i - 1]);
        tau = (1.0 - a) * taus[i - 1] + a * taus[i];
      }
    };
  }
  sc.controller = ctl;

  WalkResult r;
  r.trace = simulate(sc);
  auto& s = r.summary;
  s.fell = r.trace.fell;
  s.fall_time = r.trace.fall_time;
  s.simulated_time = r.trace.t.back();
  s.rejected_steps = r.trace.rejected_steps;
  double sq = 0.0;
  long count = 0;
  s.min_normal_force = std::numeric_limits<double>::infinity();
  VecX q_ref, qd_ref;
  for (std::size_t i = 0; i < r.trace.size(); ++i) {
    ctl.reference(r.trace.t[i], q_ref, qd_ref);
    const VecX err = (r.trace.q[i].segment(nb, na) - q_ref) * (180.0 / std::numbers::pi);
    sq += err.squaredNorm();
    count += na;
    s.max_tracking_deg = std::max(s.max_tracking_deg, err.lpNorm<Eigen::Infinity>());
    for (double d : r.trace.depth[i]) s.max_penetration = std::max(s.max_penetration, d);
  }
  s.rms_tracking_deg = std::sqrt(sq / static_cast<double>(count));
  // Per-point normal forces are not traced; re-evaluate at the samples.
  for (std::size_t i = 0; i < r.trace.size(); ++i) {
    const auto snap = evaluate_contacts(tree, r.trace.q[i], r.trace.qd[i], sc.contact);
    for (const auto& g : snap.groups) {
      for (const auto& p : g.points) s.min_normal_force = std::min(s.min_normal_force, p.normal);
    }
  }
  s.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

double fluctuation_variance(const std::vector<Vec2>& x, int window) {
  if (window < 1 || window % 2 == 0) throw ValidationError("fluctuation_variance: window must be odd and positive");
  const auto n = static_cast<long>(x.size());
  if (n == 0) throw ValidationError("fluctuation_variance: empty signal");
  const long half = window / 2;
  double sum = 0.0;
  for (long i = 0; i < n; ++i) {
    const long lo = std::max(0L, i - half);
    const long hi = std::min(n - 1, i + half);
    Vec2 mean = Vec2::Zero();
    for (long j = lo; j <= hi; ++j) mean += x[j];
    mean /= static_cast<double>(hi - lo + 1);
    sum += (x[i] - mean).squaredNorm();
  }
  return sum / static_cast<double>(n);
}

ZmpComparison compare_zmp(const RigidBodyTree& tree, const gait::Trajectory& reference, const SimTrace& trace,
                          int window) {
  if (trace.size() == 0) throw ValidationError("compare_zmp: empty trace");
  const int lf = tree.contact_group_index("lf");
  const int rf = tree.contact_group_index("rf");
  const double t0 = reference.samples.front().t;
  const double tol = 1e-9 + 0.5 * (trace.size() > 1 ? trace.t[1] - trace.t[0] : 0.0);
  ZmpComparison c;
  for (const auto& smp : reference.samples) {
    const double t = smp.t - t0;
    const auto it = std::lower_bound(trace.t.begin(), trace.t.end(), t - tol);
    if (it == trace.t.end() || std::abs(*it - t) > tol) continue;
    const auto& z = trace.zmp[static_cast<std::size_t>(it - trace.t.begin())];
    if (!z) continue;
    const GeneralizedState st{smp.q, smp.qd, smp.qdd, smp.t};
    std::vector<ContactWrench> w;
    if (smp.stance == gait::Stance::Both) {
      const auto r = rigid::dsp_inverse_dynamics(tree, st, lf, rf);
      w = {r.left, r.right};
    } else {
      w = {rigid::ssp_inverse_dynamics(tree, st, smp.stance == gait::Stance::Left ? lf : rf).wrench};
    }
    c.t.push_back(t);
    c.compliant.push_back(*z);
    c.rigid.push_back(rigid::zmp_from_wrenches(w, 0.0));
  }
  if (c.t.empty()) throw ValidationError("compare_zmp: trace and reference share no sample times");
  c.compliant_variance = fluctuation_variance(c.compliant, window);
  c.rigid_variance = fluctuation_variance(c.rigid, window);
  return c;
}

}  // namespace contactdyn::sim
