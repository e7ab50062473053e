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

// Floating-base articulated rigid-body model.
//
// Generalized coordinates for a floating tree are
//   q = [x y z yaw pitch roll | actuated joint angles...]
// with the base orientation R = Rz(yaw) Ry(pitch) Rx(roll) (ZYX Euler).
// Velocities and accelerations are plain time derivatives of q, so M, V and G
// are expressed in Euler-rate coordinates. The base is realised internally as
// six massless 1-DOF bodies (three world-aligned prismatic, then revolute
// z, y, x), which lets every algorithm below treat the tree uniformly.
//
// Fixed-base trees (no floating joint) are also accepted; then every
// coordinate is actuated.

#ifndef CONTACTDYN_KINETREE_HPP_
#define CONTACTDYN_KINETREE_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "contactdyn/types.hpp"

namespace contactdyn::kinetree {

enum class JointType { Revolute, Prismatic, Floating };

struct LinkSpec {
  std::string name;
  double mass = 0.0;
  Vec3 com = Vec3::Zero();           // in link frame
  Mat3 inertia = Mat3::Zero();       // about the COM, link-frame axes
};

struct JointSpec {
  std::string name;
  JointType type = JointType::Revolute;
  std::string parent;                // "world" for the root joint
  std::string child;
  Vec3 axis = Vec3::UnitZ();
  Pose origin;                       // child joint frame in parent link frame
};

// Points on one link that can touch the ground. `reference` is the point at
// which the group's contact wrench is reported (foot reference point).
struct ContactGroupSpec {
  std::string name;
  std::string link;
  Vec3 reference = Vec3::Zero();
  std::vector<Vec3> points;
};

struct ModelSpec {
  std::string name;
  Vec3 gravity{0.0, 0.0, -9.81};
  std::vector<LinkSpec> links;
  std::vector<JointSpec> joints;
  std::vector<ContactGroupSpec> contacts;
};

struct ContactGroup {
  std::string name;
  int link = -1;
  Vec3 reference = Vec3::Zero();
  std::vector<Vec3> points;
};

// Validated, immutable tree. Construct through build_tree().
class RigidBodyTree {
 public:
  // Internal 1-DOF body; index == generalized coordinate index.
  struct Body {
    int parent = -1;
    JointType type = JointType::Revolute;  // Revolute or Prismatic only
    Vec3 axis = Vec3::UnitZ();
    Pose origin;
    int link = -1;  // -1 for massless virtual base bodies
    double mass = 0.0;
    Vec3 com = Vec3::Zero();
    Mat3 inertia = Mat3::Zero();
    Mat6 spatial_inertia = Mat6::Zero();
  };

  const std::string& name() const { return name_; }
  int dof() const { return static_cast<int>(bodies_.size()); }
  int num_base() const { return floating_ ? 6 : 0; }
  int num_actuated() const { return dof() - num_base(); }
  bool floating() const { return floating_; }
  const Vec3& gravity() const { return gravity_; }
  double total_mass() const { return total_mass_; }

  int num_links() const { return static_cast<int>(links_.size()); }
  const LinkSpec& link(int i) const { return links_.at(i); }
  int link_index(std::string_view name) const;  // throws ValidationError
  int link_body(int link) const { return link_body_.at(link); }

  const std::vector<Body>& bodies() const { return bodies_; }
  // Name of generalized coordinate i ("base_x", ..., then joint names).
  const std::string& coordinate_name(int i) const { return coord_names_.at(i); }
  // Index of the actuated joint with this name within tau (0-based).
  int actuated_index(std::string_view joint) const;

  const std::vector<ContactGroup>& contact_groups() const { return contacts_; }
  int contact_group_index(std::string_view name) const;

  // Selection matrix B = [0; I], (dof x num_actuated).
  MatX selection_matrix() const;

  const ModelSpec& spec() const { return spec_; }

 private:
  friend RigidBodyTree build_tree(const ModelSpec& spec);

  std::string name_;
  bool floating_ = false;
  Vec3 gravity_ = Vec3(0, 0, -9.81);
  double total_mass_ = 0.0;
  std::vector<LinkSpec> links_;
  std::vector<int> link_body_;
  std::vector<Body> bodies_;
  std::vector<std::string> coord_names_;
  std::vector<ContactGroup> contacts_;
  ModelSpec spec_;
};

struct GeneralizedState {
  VecX q;
  VecX qd;
  VecX qdd;
  double t = 0.0;

  static GeneralizedState zero(const RigidBodyTree& tree);
};

// Half-width of the excluded band around pitch = +-pi/2.
inline constexpr double kPitchGuard = 1e-3;

// Throws ValidationError on non-tree topology, non-SPD inertia, mass <= 0,
// naming the offending link or joint.
RigidBodyTree build_tree(const ModelSpec& spec);

// Dimension and Euler-singularity checks; throws ValidationError.
void check_configuration(const RigidBodyTree& tree, const VecX& q);
void check_state(const RigidBodyTree& tree, const GeneralizedState& state);

// World pose of every link frame, indexed by link id.
std::vector<Pose> forward_kinematics(const RigidBodyTree& tree, const VecX& q);

// World pose of every internal body (dof entries).
std::vector<Pose> body_poses(const RigidBodyTree& tree, const VecX& q);

// 6 x dof Jacobian of `point` (link frame) on `link`; rows are
// (linear velocity; angular velocity), both in world coordinates.
MatX point_jacobian(const RigidBodyTree& tree, const VecX& q, int link,
                    const Vec3& point);

MatX mass_matrix(const RigidBodyTree& tree, const VecX& q);

// V(q, qd) + G(q).
VecX bias_forces(const RigidBodyTree& tree, const VecX& q, const VecX& qd);
// G(q) alone (bias forces at qd = 0).
VecX gravity_forces(const RigidBodyTree& tree, const VecX& q);

// M(q) qdd + V(q, qd) + G(q) via recursive Newton-Euler.
VecX inverse_dynamics_free(const RigidBodyTree& tree, const VecX& q,
                           const VecX& qd, const VecX& qdd);

Vec3 com(const RigidBodyTree& tree, const VecX& q);

// World-frame motion of every link frame origin.
struct LinkMotion {
  Pose pose;
  Vec3 angular = Vec3::Zero();
  Vec3 linear = Vec3::Zero();
};
std::vector<LinkMotion> link_motion(const RigidBodyTree& tree, const VecX& q,
                                    const VecX& qd);

// COM acceleration from a world-frame vector-mechanics recursion. Kept
// separate from the spatial-algebra RNEA so it can serve as a momentum-rate
// cross-check.
Vec3 com_acceleration(const RigidBodyTree& tree, const VecX& q, const VecX& qd,
                      const VecX& qdd);

}  // namespace contactdyn::kinetree

#endif  // CONTACTDYN_KINETREE_HPP_
