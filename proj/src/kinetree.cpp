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

#include "contactdyn/kinetree.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "contactdyn/errors.hpp"

namespace contactdyn {

Mat3 rotation_zyx(double yaw, double pitch, double roll) {
  return (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) *
          Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
          Eigen::AngleAxisd(roll, Vec3::UnitX()))
      .toRotationMatrix();
}

Pose Pose::from_xyz_rpy(const Vec3& xyz, const Vec3& rpy) {
  return {rotation_zyx(rpy.z(), rpy.y(), rpy.x()), xyz};
}

namespace kinetree {
namespace {

// Plucker motion transform from parent to child coordinates, where the child
// frame has orientation `rot` and origin `pos` relative to the parent.
Mat6 motion_transform(const Mat3& rot, const Vec3& pos) {
  const Mat3 e = rot.transpose();
  Mat6 x = Mat6::Zero();
  x.topLeftCorner<3, 3>() = e;
  x.bottomRightCorner<3, 3>() = e;
  x.bottomLeftCorner<3, 3>() = -e * skew(pos);
  return x;
}

// v x (motion)
Mat6 cross_motion(const Vec6& v) {
  Mat6 m = Mat6::Zero();
  m.topLeftCorner<3, 3>() = skew(v.head<3>());
  m.bottomRightCorner<3, 3>() = skew(v.head<3>());
  m.bottomLeftCorner<3, 3>() = skew(v.tail<3>());
  return m;
}

Mat6 spatial_inertia(double mass, const Vec3& c, const Mat3& ic) {
  const Mat3 cx = skew(c);
  Mat6 i = Mat6::Zero();
  i.topLeftCorner<3, 3>() = ic + mass * cx * cx.transpose();
  i.topRightCorner<3, 3>() = mass * cx;
  i.bottomLeftCorner<3, 3>() = mass * cx.transpose();
  i.bottomRightCorner<3, 3>() = mass * Mat3::Identity();
  return i;
}

Vec6 motion_subspace(const RigidBodyTree::Body& b) {
  Vec6 s = Vec6::Zero();
  if (b.type == JointType::Revolute) {
    s.head<3>() = b.axis;
  } else {
    s.tail<3>() = b.axis;
  }
  return s;
}

// Joint-relative transform: child pose in parent body frame.
Pose relative_pose(const RigidBodyTree::Body& b, double qi) {
  Pose p = b.origin;
  if (b.type == JointType::Revolute) {
    p.rotation = b.origin.rotation * Eigen::AngleAxisd(qi, b.axis).toRotationMatrix();
  } else {
    p.translation = b.origin.translation + b.origin.rotation * b.axis * qi;
  }
  return p;
}

std::vector<Mat6> parent_transforms(const RigidBodyTree& tree, const VecX& q) {
  const auto& bodies = tree.bodies();
  std::vector<Mat6> xup(bodies.size());
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    const Pose rel = relative_pose(bodies[i], q[static_cast<Eigen::Index>(i)]);
    xup[i] = motion_transform(rel.rotation, rel.translation);
  }
  return xup;
}

bool is_spd(const Mat3& m) {
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
    return false;
  }
  Eigen::SelfAdjointEigenSolver<Mat3> es(m);
  return es.eigenvalues().minCoeff() > 0.0;
}

}  // namespace

int RigidBodyTree::link_index(std::string_view name) const {
  for (std::size_t i = 0; i < links_.size(); ++i) {
    if (links_[i].name == name) return static_cast<int>(i);
  }
  throw ValidationError("unknown link '" + std::string(name) + "'");
}

int RigidBodyTree::actuated_index(std::string_view joint) const {
  for (int i = num_base(); i < dof(); ++i) {
    if (coord_names_[i] == joint) return i - num_base();
  }
  throw ValidationError("unknown joint '" + std::string(joint) + "'");
}

int RigidBodyTree::contact_group_index(std::string_view name) const {
  for (std::size_t i = 0; i < contacts_.size(); ++i) {
    if (contacts_[i].name == name) return static_cast<int>(i);
  }
  throw ValidationError("unknown contact group '" + std::string(name) + "'");
}

MatX RigidBodyTree::selection_matrix() const {
  MatX b = MatX::Zero(dof(), num_actuated());
  b.bottomRows(num_actuated()).setIdentity();
  return b;
}

GeneralizedState GeneralizedState::zero(const RigidBodyTree& tree) {
  return {VecX::Zero(tree.dof()), VecX::Zero(tree.dof()), VecX::Zero(tree.dof()), 0.0};
}

RigidBodyTree build_tree(const ModelSpec& spec) {
  if (spec.links.empty()) throw ValidationError("model has no links");

  std::map<std::string, int> link_ids;
  for (std::size_t i = 0; i < spec.links.size(); ++i) {
    const auto& l = spec.links[i];
    if (!link_ids.emplace(l.name, static_cast<int>(i)).second) {
      throw ValidationError("duplicate link '" + l.name + "'");
    }
    if (!(l.mass > 0.0) || !std::isfinite(l.mass)) {
      throw ValidationError("link '" + l.name + "': mass must be > 0");
    }
    if (!l.com.allFinite() || !l.inertia.allFinite() || !is_spd(l.inertia)) {
      throw ValidationError("link '" + l.name + "': inertia must be symmetric positive definite");
    }
  }

  // Each link is the child of exactly one joint.
  std::vector<int> parent_joint(spec.links.size(), -1);
  int root_joint = -1;
  int floating_count = 0;
  for (std::size_t j = 0; j < spec.joints.size(); ++j) {
    const auto& jt = spec.joints[j];
    auto child = link_ids.find(jt.child);
    if (child == link_ids.end()) {
      throw ValidationError("joint '" + jt.name + "': unknown child link '" + jt.child + "'");
    }
    if (parent_joint[child->second] != -1) {
      throw ValidationError("topology error: link '" + jt.child + "' has more than one parent");
    }
    parent_joint[child->second] = static_cast<int>(j);
    if (jt.parent == "world") {
      if (root_joint != -1) {
        throw ValidationError("topology error: more than one joint attached to world ('" +
                              spec.joints[root_joint].name + "', '" + jt.name + "')");
      }
      root_joint = static_cast<int>(j);
    } else if (!link_ids.count(jt.parent)) {
      throw ValidationError("joint '" + jt.name + "': unknown parent link '" + jt.parent + "'");
    }
    if (jt.type == JointType::Floating) {
      ++floating_count;
      if (jt.parent != "world") {
        throw ValidationError("joint '" + jt.name + "': floating joint must attach to world");
      }
    } else if (!(jt.axis.norm() > 0.0) || !jt.axis.allFinite()) {
      throw ValidationError("joint '" + jt.name + "': axis must be nonzero");
    }
  }
  if (root_joint == -1) throw ValidationError("topology error: no joint attached to world");
  if (floating_count > 1) throw ValidationError("topology error: more than one floating joint");
  for (std::size_t i = 0; i < spec.links.size(); ++i) {
    if (parent_joint[i] == -1) {
      throw ValidationError("topology error: link '" + spec.links[i].name + "' has no parent joint");
    }
  }

  RigidBodyTree tree;
  tree.name_ = spec.name;
  tree.gravity_ = spec.gravity;
  tree.links_ = spec.links;
  tree.link_body_.assign(spec.links.size(), -1);
  tree.spec_ = spec;

  // Breadth-first from the root; a link unreachable from it sits on a cycle.
  std::vector<std::vector<int>> children(spec.links.size());
  for (std::size_t j = 0; j < spec.joints.size(); ++j) {
    if (static_cast<int>(j) == root_joint) continue;
    children[link_ids.at(spec.joints[j].parent)].push_back(static_cast<int>(j));
  }

  auto add_body = [&](int parent, JointType type, const Vec3& axis, const Pose& origin,
                      int link, const std::string& coord) {
    RigidBodyTree::Body b;
    b.parent = parent;
    b.type = type;
    b.axis = axis.normalized();
    b.origin = origin;
    b.link = link;
    if (link >= 0) {
      const auto& l = spec.links[link];
      b.mass = l.mass;
      b.com = l.com;
      b.inertia = l.inertia;
      b.spatial_inertia = spatial_inertia(l.mass, l.com, l.inertia);
      tree.link_body_[link] = static_cast<int>(tree.bodies_.size());
    }
    tree.bodies_.push_back(b);
    tree.coord_names_.push_back(coord);
    return static_cast<int>(tree.bodies_.size()) - 1;
  };

  const auto& rj = spec.joints[root_joint];
  const int root_link = link_ids.at(rj.child);
  if (rj.type == JointType::Floating) {
    tree.floating_ = true;
    int p = -1;
    p = add_body(p, JointType::Prismatic, Vec3::UnitX(), rj.origin, -1, "base_x");
    p = add_body(p, JointType::Prismatic, Vec3::UnitY(), Pose{}, -1, "base_y");
    p = add_body(p, JointType::Prismatic, Vec3::UnitZ(), Pose{}, -1, "base_z");
    p = add_body(p, JointType::Revolute, Vec3::UnitZ(), Pose{}, -1, "base_yaw");
    p = add_body(p, JointType::Revolute, Vec3::UnitY(), Pose{}, -1, "base_pitch");
    add_body(p, JointType::Revolute, Vec3::UnitX(), Pose{}, root_link, "base_roll");
  } else {
    add_body(-1, rj.type, rj.axis, rj.origin, root_link, rj.name);
  }

  // Depth-first preorder keeps each limb's coordinates contiguous.
  std::vector<bool> visited(spec.links.size(), false);
  visited[root_link] = true;
  std::vector<int> stack{root_link};
  while (!stack.empty()) {
    const int l = stack.back();
    stack.pop_back();
    if (l != root_link) {
      const auto& jt = spec.joints[parent_joint[l]];
      add_body(tree.link_body_[link_ids.at(jt.parent)], jt.type, jt.axis, jt.origin, l, jt.name);
    }
    for (auto it = children[l].rbegin(); it != children[l].rend(); ++it) {
      const int c = link_ids.at(spec.joints[*it].child);
      if (visited[c]) {
        throw ValidationError("topology error: loop through link '" + spec.links[c].name + "'");
      }
      visited[c] = true;
      stack.push_back(c);
    }
  }
  for (std::size_t i = 0; i < spec.links.size(); ++i) {
    if (!visited[i]) {
      throw ValidationError("topology error: link '" + spec.links[i].name +
                            "' is not connected to the root (closed loop)");
    }
  }

  for (const auto& l : spec.links) tree.total_mass_ += l.mass;

  for (const auto& c : spec.contacts) {
    if (c.points.empty()) {
      throw ValidationError("contact group '" + c.name + "' has no points");
    }
    ContactGroup g;
    g.name = c.name;
    auto it = link_ids.find(c.link);
    if (it == link_ids.end()) {
      throw ValidationError("contact group '" + c.name + "': unknown link '" + c.link + "'");
    }
    g.link = it->second;
    g.reference = c.reference;
    g.points = c.points;
    tree.contacts_.push_back(std::move(g));
  }
  return tree;
}

void check_configuration(const RigidBodyTree& tree, const VecX& q) {
  if (q.size() != tree.dof()) {
    std::ostringstream os;
    os << "dimension mismatch: q has " << q.size() << " entries, tree expects " << tree.dof();
    throw ValidationError(os.str());
  }
  if (tree.floating() && std::abs(q[4]) >= std::numbers::pi / 2 - kPitchGuard) {
    throw ValidationError("base pitch " + std::to_string(q[4]) +
                          " rad is inside the Euler singularity guard band");
  }
}

void check_state(const RigidBodyTree& tree, const GeneralizedState& s) {
  check_configuration(tree, s.q);
  if (s.qd.size() != tree.dof() || s.qdd.size() != tree.dof()) {
    throw ValidationError("dimension mismatch: q, qd, qdd must all have " +
                          std::to_string(tree.dof()) + " entries");
  }
}

std::vector<Pose> body_poses(const RigidBodyTree& tree, const VecX& q) {
  check_configuration(tree, q);
  const auto& bodies = tree.bodies();
  std::vector<Pose> world(bodies.size());
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    const Pose rel = relative_pose(bodies[i], q[static_cast<Eigen::Index>(i)]);
    world[i] = bodies[i].parent < 0 ? rel : world[bodies[i].parent] * rel;
  }
  return world;
}

std::vector<Pose> forward_kinematics(const RigidBodyTree& tree, const VecX& q) {
  const auto world = body_poses(tree, q);
  std::vector<Pose> out(tree.num_links());
  for (int l = 0; l < tree.num_links(); ++l) out[l] = world[tree.link_body(l)];
  return out;
}

MatX point_jacobian(const RigidBodyTree& tree, const VecX& q, int link, const Vec3& point) {
  if (link < 0 || link >= tree.num_links()) {
    throw ValidationError("unknown link id " + std::to_string(link));
  }
  const auto world = body_poses(tree, q);
  const auto& bodies = tree.bodies();
  int b = tree.link_body(link);
  const Vec3 p = world[b].apply(point);
  MatX jac = MatX::Zero(6, tree.dof());
  for (; b >= 0; b = bodies[b].parent) {
    const Vec3 axis = world[b].rotation * bodies[b].axis;
    if (bodies[b].type == JointType::Revolute) {
      jac.block<3, 1>(0, b) = axis.cross(p - world[b].translation);
      jac.block<3, 1>(3, b) = axis;
    } else {
      // The prismatic axis is expressed before its own displacement; the
      // direction is the same either way.
      jac.block<3, 1>(0, b) = axis;
    }
  }
  return jac;
}

MatX mass_matrix(const RigidBodyTree& tree, const VecX& q) {
  check_configuration(tree, q);
  const auto& bodies = tree.bodies();
  const int n = tree.dof();
  const auto xup = parent_transforms(tree, q);
  std::vector<Mat6> ic(n);
  for (int i = 0; i < n; ++i) ic[i] = bodies[i].spatial_inertia;
  for (int i = n - 1; i >= 0; --i) {
    const int p = bodies[i].parent;
    if (p >= 0) ic[p] += xup[i].transpose() * ic[i] * xup[i];
  }
  MatX h = MatX::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const Vec6 si = motion_subspace(bodies[i]);
    Vec6 f = ic[i] * si;
    h(i, i) = si.dot(f);
    int j = i;
    while (bodies[j].parent >= 0) {
      f = xup[j].transpose() * f;
      j = bodies[j].parent;
      h(i, j) = f.dot(motion_subspace(bodies[j]));
      h(j, i) = h(i, j);
    }
  }
  return h;
}

VecX inverse_dynamics_free(const RigidBodyTree& tree, const VecX& q, const VecX& qd,
                           const VecX& qdd) {
  check_configuration(tree, q);
  const int n = tree.dof();
  if (qd.size() != n || qdd.size() != n) {
    throw ValidationError("dimension mismatch: qd/qdd must have " + std::to_string(n) + " entries");
  }
  const auto& bodies = tree.bodies();
  const auto xup = parent_transforms(tree, q);
  Vec6 a_world = Vec6::Zero();
  a_world.tail<3>() = -tree.gravity();

  std::vector<Vec6> v(n), a(n), f(n);
  for (int i = 0; i < n; ++i) {
    const Vec6 s = motion_subspace(bodies[i]);
    const Vec6 vj = s * qd[i];
    const int p = bodies[i].parent;
    const Vec6 vp = p >= 0 ? v[p] : Vec6::Zero().eval();
    const Vec6 ap = p >= 0 ? a[p] : a_world;
    v[i] = xup[i] * vp + vj;
    a[i] = xup[i] * ap + s * qdd[i] + cross_motion(v[i]) * vj;
    const Mat6& in = bodies[i].spatial_inertia;
    f[i] = in * a[i] - cross_motion(v[i]).transpose() * (in * v[i]);
  }
  VecX tau(n);
  for (int i = n - 1; i >= 0; --i) {
    tau[i] = motion_subspace(bodies[i]).dot(f[i]);
    const int p = bodies[i].parent;
    if (p >= 0) f[p] += xup[i].transpose() * f[i];
  }
  return tau;
}

VecX bias_forces(const RigidBodyTree& tree, const VecX& q, const VecX& qd) {
  return inverse_dynamics_free(tree, q, qd, VecX::Zero(tree.dof()));
}

VecX gravity_forces(const RigidBodyTree& tree, const VecX& q) {
  const VecX zero = VecX::Zero(tree.dof());
  return inverse_dynamics_free(tree, q, zero, zero);
}

Vec3 com(const RigidBodyTree& tree, const VecX& q) {
  const auto world = body_poses(tree, q);
  Vec3 acc = Vec3::Zero();
  const auto& bodies = tree.bodies();
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    if (bodies[i].link < 0) continue;
    acc += bodies[i].mass * world[i].apply(bodies[i].com);
  }
  return acc / tree.total_mass();
}

namespace {

struct WorldMotion {
  std::vector<Pose> pose;
  std::vector<Vec3> omega, vel, alpha, acc;
};

// Classical world-frame recursion for body origins.
WorldMotion world_recursion(const RigidBodyTree& tree, const VecX& q, const VecX& qd,
                            const VecX* qdd) {
  const auto& bodies = tree.bodies();
  const std::size_t n = bodies.size();
  WorldMotion m;
  m.pose = body_poses(tree, q);
  m.omega.assign(n, Vec3::Zero());
  m.vel.assign(n, Vec3::Zero());
  m.alpha.assign(n, Vec3::Zero());
  m.acc.assign(n, Vec3::Zero());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& b = bodies[i];
    const int p = b.parent;
    const Vec3 wp = p >= 0 ? m.omega[p] : Vec3::Zero();
    const Vec3 vp = p >= 0 ? m.vel[p] : Vec3::Zero();
    const Vec3 alp = p >= 0 ? m.alpha[p] : Vec3::Zero();
    const Vec3 ap = p >= 0 ? m.acc[p] : Vec3::Zero();
    const Vec3 pp = p >= 0 ? m.pose[p].translation : Vec3::Zero();
    const Mat3 rp = p >= 0 ? m.pose[p].rotation : Mat3::Identity();
    const Vec3 z = rp * b.origin.rotation * b.axis;
    const Vec3 r = m.pose[i].translation - pp;
    const double dq = qd[static_cast<Eigen::Index>(i)];
    const double ddq = qdd ? (*qdd)[static_cast<Eigen::Index>(i)] : 0.0;
    m.omega[i] = wp;
    m.vel[i] = vp + wp.cross(r);
    m.alpha[i] = alp;
    m.acc[i] = ap + alp.cross(r) + wp.cross(wp.cross(r));
    if (b.type == JointType::Revolute) {
      m.omega[i] += z * dq;
      m.alpha[i] += z * ddq + wp.cross(z) * dq;
    } else {
      m.vel[i] += z * dq;
      m.acc[i] += z * ddq + 2.0 * wp.cross(z) * dq;
    }
  }
  return m;
}

}  // namespace

std::vector<LinkMotion> link_motion(const RigidBodyTree& tree, const VecX& q, const VecX& qd) {
  if (qd.size() != tree.dof()) throw ValidationError("dimension mismatch: qd");
  const auto m = world_recursion(tree, q, qd, nullptr);
  std::vector<LinkMotion> out(tree.num_links());
  for (int l = 0; l < tree.num_links(); ++l) {
    const int b = tree.link_body(l);
    out[l] = {m.pose[b], m.omega[b], m.vel[b]};
  }
  return out;
}

Vec3 com_acceleration(const RigidBodyTree& tree, const VecX& q, const VecX& qd,
                      const VecX& qdd) {
  if (qd.size() != tree.dof() || qdd.size() != tree.dof()) {
    throw ValidationError("dimension mismatch: qd/qdd");
  }
  const auto m = world_recursion(tree, q, qd, &qdd);
  const auto& bodies = tree.bodies();
  Vec3 acc = Vec3::Zero();
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    if (bodies[i].link < 0) continue;
    const Vec3 rc = m.pose[i].rotation * bodies[i].com;
    const Vec3 ac = m.acc[i] + m.alpha[i].cross(rc) + m.omega[i].cross(m.omega[i].cross(rc));
    acc += bodies[i].mass * ac;
  }
  return acc / tree.total_mass();
}

}  // namespace kinetree
}  // namespace contactdyn
