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

#include "contactdyn/rigid_contact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/SVD>

#include "contactdyn/errors.hpp"

namespace contactdyn::rigid {

using kinetree::GeneralizedState;
using kinetree::RigidBodyTree;

namespace {

double cross2(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

const kinetree::ContactGroup& group_at(const RigidBodyTree& tree, int group) {
  const auto& groups = tree.contact_groups();
  if (group < 0 || group >= static_cast<int>(groups.size())) {
    throw ValidationError("contact group index " + std::to_string(group) + " out of range");
  }
  return groups[group];
}

void require_floating(const RigidBodyTree& tree, const char* what) {
  if (!tree.floating()) throw ValidationError(std::string(what) + ": model has no floating base");
}

ContactWrench wrench_from(const VecX& x, int offset, const Vec3& point) {
  ContactWrench w;
  w.force = x.segment<3>(offset);
  w.moment = x.segment<3>(offset + 3);
  w.point = point;
  return w;
}

}  // namespace

double SupportPolygon::area() const {
  double a = 0.0;
  const size_t n = vertices.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2& p = vertices[i];
    const Vec2& r = vertices[(i + 1) % n];
    a += p.x() * r.y() - r.x() * p.y();
  }
  return 0.5 * a;
}

double SupportPolygon::signed_margin(const Vec2& p) const {
  if (vertices.size() < 3) return -std::numeric_limits<double>::infinity();
  double inside = std::numeric_limits<double>::infinity();
  double outside = 0.0;
  bool is_inside = true;
  const size_t n = vertices.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2& a = vertices[i];
    const Vec2& b = vertices[(i + 1) % n];
    const Vec2 e = b - a;
    const double len = e.norm();
    const double s = cross2(a, b, p) / len;  // > 0 left of the edge
    inside = std::min(inside, s);
    if (s < 0.0) is_inside = false;
    // Distance to the segment, for the outside case.
    const double t = std::clamp((p - a).dot(e) / (len * len), 0.0, 1.0);
    const double dist = (a + t * e - p).norm();
    outside = i == 0 ? dist : std::min(outside, dist);
  }
  return is_inside ? inside : -outside;
}

SupportPolygon convex_hull(std::span<const Vec2> points) {
  std::vector<Vec2> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  SupportPolygon out;
  if (pts.size() < 3) {
    out.vertices = pts;
    return out;
  }
  std::vector<Vec2> hull(2 * pts.size());
  size_t k = 0;
  for (const Vec2& p : pts) {
    while (k >= 2 && cross2(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross2(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  out.vertices = std::move(hull);
  return out;
}

SupportPolygon support_polygon(const RigidBodyTree& tree, const VecX& q, std::span<const int> groups) {
  const auto poses = kinetree::forward_kinematics(tree, q);
  std::vector<Vec2> pts;
  for (int g : groups) {
    const auto& grp = group_at(tree, g);
    for (const Vec3& p : grp.points) pts.push_back(poses[grp.link].apply(p).head<2>());
  }
  return convex_hull(pts);
}

MatX contact_jacobian(const RigidBodyTree& tree, const VecX& q, int group) {
  const auto& grp = group_at(tree, group);
  return kinetree::point_jacobian(tree, q, grp.link, grp.reference);
}

Vec3 reference_point(const RigidBodyTree& tree, const VecX& q, int group) {
  const auto& grp = group_at(tree, group);
  return kinetree::forward_kinematics(tree, q)[grp.link].apply(grp.reference);
}

CheckedSolution checked_solve(const MatX& a, const VecX& d, const char* what) {
  if (a.rows() != a.cols() || a.rows() != d.size()) {
    throw ValidationError(std::string(what) + ": system is not square");
  }
  Eigen::JacobiSVD<MatX> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  const double cond = smin > 0.0 ? s(0) / smin : std::numeric_limits<double>::infinity();
  if (!(cond < kMaxCondition)) {
    throw NumericError(std::string(what) + ": matrix is ill-conditioned (cond = " + std::to_string(cond) + ")",
                       cond);
  }
  return {svd.solve(d), cond};
}

SspSolution ssp_inverse_dynamics(const RigidBodyTree& tree, const GeneralizedState& state, int stance) {
  require_floating(tree, "ssp_inverse_dynamics");
  kinetree::check_state(tree, state);
  const int n = tree.dof();
  const int na = tree.num_actuated();
  const VecX d = kinetree::inverse_dynamics_free(tree, state.q, state.qd, state.qdd);

  MatX a(n, na + 6);
  a << tree.selection_matrix(), contact_jacobian(tree, state.q, stance).transpose();
  const auto [x, cond] = checked_solve(a, d, "ssp_inverse_dynamics");

  SspSolution out;
  out.tau = x.head(na);
  out.wrench = wrench_from(x, na, reference_point(tree, state.q, stance));
  out.condition = cond;
  out.residual = (a * x - d).lpNorm<Eigen::Infinity>();
  return out;
}

MinNormSolution min_norm_solve(const MatX& c, const VecX& d, const std::optional<VecX>& k) {
  if (c.rows() != d.size()) throw ValidationError("min_norm_solve: C and D row counts differ");
  if (k && k->size() != c.cols()) throw ValidationError("min_norm_solve: k has the wrong length");
  Eigen::JacobiSVD<MatX> svd(c, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VecX& s = svd.singularValues();
  const double tol = 1e-10 * (s.size() ? s(0) : 0.0);
  int rank = 0;
  VecX s_inv = VecX::Zero(s.size());
  for (int i = 0; i < s.size(); ++i) {
    if (s(i) > tol) {
      s_inv(i) = 1.0 / s(i);
      ++rank;
    }
  }
  if (rank < c.rows()) {
    throw RankError("constraint matrix is rank deficient: rank " + std::to_string(rank) + " of " +
                        std::to_string(c.rows()),
                    rank, static_cast<int>(c.rows()));
  }
  const MatX pinv = svd.matrixV() * s_inv.asDiagonal() * svd.matrixU().transpose();
  MinNormSolution out;
  out.x = pinv * d;
  if (k) out.x += *k - pinv * (c * *k);
  out.rank = rank;
  out.residual = (c * out.x - d).lpNorm<Eigen::Infinity>();
  out.certificate = (out.x - pinv * (c * out.x)).lpNorm<Eigen::Infinity>();
  return out;
}

DspSolution dsp_inverse_dynamics(const RigidBodyTree& tree, const GeneralizedState& state, int left, int right,
                                 const std::optional<VecX>& k) {
  require_floating(tree, "dsp_inverse_dynamics");
  kinetree::check_state(tree, state);
  const int n = tree.dof();
  const int na = tree.num_actuated();
  const VecX d = kinetree::inverse_dynamics_free(tree, state.q, state.qd, state.qdd);

  MatX c(n, na + 12);
  c << tree.selection_matrix(), contact_jacobian(tree, state.q, left).transpose(),
      contact_jacobian(tree, state.q, right).transpose();
  const MinNormSolution sol = min_norm_solve(c, d, k);

  DspSolution out;
  out.tau = sol.x.head(na);
  out.left = wrench_from(sol.x, na, reference_point(tree, state.q, left));
  out.right = wrench_from(sol.x, na + 6, reference_point(tree, state.q, right));
  out.rank = sol.rank;
  out.residual = sol.residual;
  out.certificate = sol.certificate;
  return out;
}

Vec2 zmp_from_wrenches(std::span<const ContactWrench> wrenches, double sole_height, double min_load) {
  const Vec3 o(0.0, 0.0, sole_height);
  Vec3 f = Vec3::Zero();
  Vec3 m = Vec3::Zero();
  for (const auto& w : wrenches) {
    f += w.force;
    m += w.moment_about(o);
  }
  if (!(f.z() > min_load)) {
    throw UndefinedZmp("ZMP undefined: total normal load " + std::to_string(f.z()) + " N is below " +
                       std::to_string(min_load) + " N");
  }
  return Vec2(-m.y() / f.z(), m.x() / f.z());
}

FeasibilityReport feasibility_check(std::span<const ContactWrench> wrenches, const SupportPolygon& polygon,
                                    double mu, double sole_height) {
  FeasibilityReport r;
  r.normal_margin = std::numeric_limits<double>::infinity();
  r.friction_margin = std::numeric_limits<double>::infinity();
  for (const auto& w : wrenches) {
    r.normal_margin = std::min(r.normal_margin, w.force.z());
    r.friction_margin = std::min(r.friction_margin, mu * w.force.z() - w.force.head<2>().norm());
  }
  r.unilateral = r.normal_margin >= 0.0;
  r.friction = r.friction_margin >= 0.0;
  try {
    r.zmp = zmp_from_wrenches(wrenches, sole_height);
    r.zmp_margin = polygon.signed_margin(*r.zmp);
    r.zmp_inside = r.zmp_margin > 0.0;
  } catch (const UndefinedZmp&) {
    r.zmp_margin = -std::numeric_limits<double>::infinity();
  }
  return r;
}

}  // namespace contactdyn::rigid
