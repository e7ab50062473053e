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

#ifndef CONTACTDYN_SIM_HPP_
#define CONTACTDYN_SIM_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "contactdyn/contact_models.hpp"
#include "contactdyn/gait.hpp"
#include "contactdyn/kinetree.hpp"
#include "contactdyn/wrench.hpp"

namespace contactdyn::sim {

using kinetree::GeneralizedState;
using kinetree::RigidBodyTree;

struct ContactSettings {
  contact::NormalModelParams normal = contact::TanBarrier{135.0, 4.0e6, 0.002};
  std::optional<contact::FrictionModelParams> friction = contact::PseudoCoulomb{};
  double ground_height = 0.0;
};

// Reference joint trajectory for actuated joints: fills q_ref, qd_ref at t.
using ReferenceFn = std::function<void(double t, VecX& q_ref, VecX& qd_ref)>;

struct PdGains {
  VecX kp;  // per actuated joint, N m/rad
  VecX kd;  // per actuated joint, N m s/rad
};

// Optional state feedback that edits the actuated reference in place.
using FeedbackFn = std::function<void(const GeneralizedState& state, VecX& q_ref, VecX& qd_ref)>;

// Actuated torques added to the PD output.
using FeedforwardFn = std::function<void(double t, VecX& tau)>;

struct Controller {
  PdGains gains;
  ReferenceFn reference;
  FeedbackFn feedback;
  FeedforwardFn feedforward;
};

struct Scenario {
  const RigidBodyTree* tree = nullptr;
  GeneralizedState initial;
  ContactSettings contact;
  double dt = 5e-5;
  double duration = 1.0;
  int decimation = 1;              // trace every `decimation` steps
  std::optional<Controller> controller;
  double fall_height = -1e300;     // base z below this ends the run
  int max_halvings = 30;
};

// Contact state of every contact group at one instant.
struct ContactSnapshot {
  std::vector<contact::FootContact> groups;
  VecX generalized;  // sum of J^T F over groups
};

struct SimTrace {
  std::vector<std::string> group_names;
  std::vector<double> t;
  std::vector<VecX> q;
  std::vector<VecX> qd;
  std::vector<VecX> tau;                              // actuated torques
  std::vector<std::vector<ContactWrench>> wrenches;   // [sample][group]
  std::vector<std::vector<double>> depth;             // [sample][flattened point]
  std::vector<std::optional<Vec2>> zmp;
  std::vector<std::uint32_t> contact_flags;           // bit g set when group g touches
  bool fell = false;
  double fall_time = 0.0;
  long steps = 0;
  long rejected_steps = 0;
  std::vector<std::string> warnings;                  // capped, see kMaxWarnings

  std::size_t size() const { return t.size(); }
};

inline constexpr std::size_t kMaxWarnings = 100;
inline constexpr double kBarrierGuard = 1e-6;  // relative margin below l_0

// qdd = M^-1 (tau_generalized - h) via Cholesky of M.
VecX forward_dynamics(const RigidBodyTree& tree, const VecX& q, const VecX& qd, const VecX& generalized_force);

ContactSnapshot evaluate_contacts(const RigidBodyTree& tree, const VecX& q, const VecX& qd,
                                  const ContactSettings& contact);

// tau_j = kp (q_ref - q) + kd (qd_ref - qd) over actuated joints.
VecX pd_tracking_torques(const RigidBodyTree& tree, const GeneralizedState& state, const VecX& q_ref,
                         const VecX& qd_ref, const PdGains& gains);

// 0.2 / omega, omega^2 = n_points * k_lin / m_link, minimised over contact groups.
double max_stable_dt(const RigidBodyTree& tree, const ContactSettings& contact);

// One semi-implicit Euler step of size dt. Steps that would push a barrier
// point past l_0 (1 - kBarrierGuard) are retried with halved size until the
// full dt is covered. Throws NumericError after max_halvings.
struct StepStats {
  int substeps = 0;
  int rejected = 0;
};
StepStats step(const Scenario& scenario, GeneralizedState& state, std::vector<std::string>* warnings = nullptr);

SimTrace simulate(const Scenario& scenario);

struct BallDropSummary {
  double max_penetration = 0.0;
  double steady_penetration = 0.0;  // final value
  double settling_time = 0.0;       // first time after which depth stays within 5% of steady
  double first_contact_force = 0.0;
  double wall_seconds = 0.0;
};

struct BallDropOptions {
  double radius = 0.1;
  double dt = 1e-5;
  double duration = 0.3;
  double drop_height = 0.0;  // gap between ball and ground at t = 0
  int decimation = 10;
};

struct BallDropResult {
  SimTrace trace;
  BallDropSummary summary;
};

BallDropResult run_ball_drop(double mass, double impact_speed, const contact::NormalModelParams& model,
                             const BallDropOptions& options = {});

BallDropSummary summarize_penetration(const std::vector<double>& t, const std::vector<double>& depth,
                                      double band = 0.05);

// Total mechanical energy: kinetic, gravitational (zero at the world origin)
// and elastic contact energy.
double mechanical_energy(const RigidBodyTree& tree, const GeneralizedState& state, const ContactSettings& contact);

// Sign changes of a signal, ignoring samples with |x| <= dead_band.
int count_sign_changes(const std::vector<double>& x, double dead_band);

struct SlideResult {
  SimTrace trace;
  std::vector<double> friction_x;  // summed tangential force along x
  int sign_changes = 0;
};

// Block sliding at initial speed until it sticks.
SlideResult run_sliding_block(const contact::FrictionModelParams& friction, double initial_speed = 0.3,
                              double dt = 1e-4, double duration = 0.5, double mass = 10.0);

struct WalkOptions {
  // Heavier barrier damping than the ball preset: at 4e6 the single-support
  // roll mode of the body on the sole is excited by every step.
  ContactSettings contact{contact::TanBarrier{135.0, 1.0e7, 0.002}};
  std::optional<PdGains> gains;  // default_walk_gains() when empty
  // At 1e-4 the foot roll mode (contact plus joint damping over the foot
  // inertia) sits past the explicit damping limit and chatters at period 2.
  double dt = 5e-5;
  int decimation = 20;
  double duration = -1.0;        // whole reference when negative
  double fall_fraction = 0.6;    // of the initial pelvis height
  // Stance-ankle posture feedback: the roll and pitch references of every
  // ankle whose sole touches the ground are offset by gain * base tilt.
  double posture_gain = 1.0;
  // Add the rigid-contact inverse-dynamics torques of the reference.
  bool feedforward = true;
};

struct WalkSummary {
  bool fell = false;
  double fall_time = 0.0;
  double simulated_time = 0.0;
  double rms_tracking_deg = 0.0;  // actuated joints, all samples
  double max_tracking_deg = 0.0;
  double min_normal_force = 0.0;  // over every contact point and sample
  double max_penetration = 0.0;
  long rejected_steps = 0;
  double wall_seconds = 0.0;
};

struct WalkResult {
  SimTrace trace;
  WalkSummary summary;
};

PdGains default_walk_gains(const RigidBodyTree& tree);

// Tracks the reference joint angles with PD control from a static double
// stance lowered onto the compliant ground. Contact state is never switched;
// the reference phase labels only pick the feedforward solve.
WalkResult run_walk(const RigidBodyTree& tree, const gait::Trajectory& reference, const WalkOptions& options = {});

// Variance about the centered moving average over `window` samples (odd),
// summed over both axes. The window shrinks at the ends.
double fluctuation_variance(const std::vector<Vec2>& x, int window);

struct ZmpComparison {
  std::vector<double> t;  // reference sample times present in the trace
  std::vector<Vec2> compliant;
  std::vector<Vec2> rigid;
  double compliant_variance = 0.0;
  double rigid_variance = 0.0;
};

// ZMP of a simulated walk against the rigid-contact solution of its
// reference, both taken at the reference sample times.
ZmpComparison compare_zmp(const RigidBodyTree& tree, const gait::Trajectory& reference, const SimTrace& trace,
                          int window = 21);

}  // namespace contactdyn::sim

#endif  // CONTACTDYN_SIM_HPP_
