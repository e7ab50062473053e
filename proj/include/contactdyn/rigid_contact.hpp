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

#ifndef CONTACTDYN_RIGID_CONTACT_HPP_
#define CONTACTDYN_RIGID_CONTACT_HPP_

#include <optional>
#include <span>
#include <vector>

#include "contactdyn/kinetree.hpp"
#include "contactdyn/wrench.hpp"

// Flat-foot rigid contact: each stance foot contributes six holonomic
// constraints (3 position, 3 orientation) at its reference point.
namespace contactdyn::rigid {

// Convex polygon in the ground plane, counter-clockwise.
struct SupportPolygon {
  std::vector<Vec2> vertices;

  double area() const;
  // Distance to the nearest edge; positive inside, zero on the boundary.
  double signed_margin(const Vec2& p) const;
  bool strictly_contains(const Vec2& p) const { return signed_margin(p) > 0.0; }
};

// Convex hull (monotone chain). Collinear boundary points are dropped.
SupportPolygon convex_hull(std::span<const Vec2> points);

// Hull of the world-frame contact points of the given groups.
SupportPolygon support_polygon(const kinetree::RigidBodyTree& tree, const VecX& q,
                               std::span<const int> groups);

// 6 x dof Jacobian of a contact group's reference point.
MatX contact_jacobian(const kinetree::RigidBodyTree& tree, const VecX& q, int group);

// World position of a contact group's reference point.
Vec3 reference_point(const kinetree::RigidBodyTree& tree, const VecX& q, int group);

struct SspSolution {
  VecX tau;
  ContactWrench wrench;
  double condition = 0.0;
  double residual = 0.0;  // inf-norm of B tau + J^T F - (M qdd + h)
};

inline constexpr double kMaxCondition = 1e8;

struct CheckedSolution {
  VecX x;
  double condition = 0.0;
};

// Square SVD solve; throws NumericError carrying cond(a) when cond >= 1e8.
CheckedSolution checked_solve(const MatX& a, const VecX& d, const char* what);

// Unique solve of [B J^T] [tau; F] = M qdd + h for one stance foot.
// Throws NumericError (carrying the condition number) when cond >= 1e8.
SspSolution ssp_inverse_dynamics(const kinetree::RigidBodyTree& tree,
                                 const kinetree::GeneralizedState& state, int stance);

struct MinNormSolution {
  VecX x;
  int rank = 0;
  double residual = 0.0;     // inf-norm of C x - D
  double certificate = 0.0;  // inf-norm of (I - C+ C) x
};

// x = C+ D + (I - C+ C) k, pseudo-inverse by SVD truncated at 1e-10 sigma_max.
// Throws RankError when C does not have full row rank.
MinNormSolution min_norm_solve(const MatX& c, const VecX& d, const std::optional<VecX>& k = {});

struct DspSolution {
  VecX tau;
  ContactWrench left;
  ContactWrench right;
  int rank = 0;
  double residual = 0.0;
  double certificate = 0.0;
};

// Minimum-norm solve of [B J_l^T J_r^T] x = M qdd + h. A non-empty k selects
// another member of the solution family.
DspSolution dsp_inverse_dynamics(const kinetree::RigidBodyTree& tree,
                                 const kinetree::GeneralizedState& state, int left, int right,
                                 const std::optional<VecX>& k = {});

inline constexpr double kMinZmpLoad = 1.0;  // N

// Point at sole height where the horizontal moment of the summed wrench
// vanishes. Throws UndefinedZmp when the total normal load is <= min_load.
Vec2 zmp_from_wrenches(std::span<const ContactWrench> wrenches, double sole_height,
                       double min_load = kMinZmpLoad);

struct FeasibilityReport {
  bool unilateral = false;
  bool friction = false;
  bool zmp_inside = false;
  double normal_margin = 0.0;    // min Fz
  double friction_margin = 0.0;  // min over feet of mu Fz - |F_t|
  double zmp_margin = 0.0;       // signed distance to the polygon boundary
  std::optional<Vec2> zmp;
};

FeasibilityReport feasibility_check(std::span<const ContactWrench> wrenches,
                                    const SupportPolygon& polygon, double mu, double sole_height);

}  // namespace contactdyn::rigid

#endif  // CONTACTDYN_RIGID_CONTACT_HPP_
