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

#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "contactdyn/errors.hpp"
#include "contactdyn/model_io.hpp"
#include "test_support.hpp"

namespace contactdyn::rigid {
namespace {

using kinetree::GeneralizedState;
using kinetree::RigidBodyTree;

constexpr double kG = 9.81;

class Surena : public ::testing::Test {
 protected:
  RigidBodyTree tree = kinetree::build_tree(model_io::preset("surena-lower"));
  int lf = tree.contact_group_index("lf");
  int rf = tree.contact_group_index("rf");

  // Symmetric crouch with both soles flat.
  GeneralizedState standing(double bend = 0.3) const {
    auto s = GeneralizedState::zero(tree);
    s.q[2] = 0.9;
    for (const char* side : {"r", "l"}) {
      const std::string p(side);
      s.q[6 + tree.actuated_index(p + "_hip_pitch")] = -bend;
      s.q[6 + tree.actuated_index(p + "_knee")] = 2 * bend;
      s.q[6 + tree.actuated_index(p + "_ankle_pitch")] = -bend;
    }
    return s;
  }

  GeneralizedState random_state(std::mt19937& rng) const {
    auto s = standing();
    s.q += testing::random_vec(tree.dof(), rng, 0.2);
    s.qd = testing::random_vec(tree.dof(), rng, 1.0);
    s.qdd = testing::random_vec(tree.dof(), rng, 3.0);
    return s;
  }

  double weight() const { return tree.total_mass() * kG; }
};

TEST_F(Surena, StaticSingleStanceCarriesWeight) {
  const auto s = standing();
  const auto sol = ssp_inverse_dynamics(tree, s, rf);
  EXPECT_NEAR(sol.wrench.force.z(), 88.0 * kG, 1e-8);
  EXPECT_NEAR(sol.wrench.force.head<2>().norm(), 0.0, 1e-8);
  EXPECT_LT(sol.residual, 1e-8);
  EXPECT_LT(sol.condition, kMaxCondition);
}

TEST_F(Surena, StaticStanceZmpIsComProjection) {
  const auto s = standing();
  const auto sol = ssp_inverse_dynamics(tree, s, lf);
  const ContactWrench w[] = {sol.wrench};
  const Vec2 zmp = zmp_from_wrenches(w, sol.wrench.point.z());
  EXPECT_NEAR((zmp - kinetree::com(tree, s.q).head<2>()).norm(), 0.0, 1e-6);
}

TEST_F(Surena, SspResidualAndMomentumBalance) {
  std::mt19937 rng(11);
  for (int i = 0; i < 100; ++i) {
    const auto s = random_state(rng);
    const auto sol = ssp_inverse_dynamics(tree, s, i % 2 ? lf : rf);
    EXPECT_LT(sol.residual, 1e-8);
    const Vec3 expected =
        tree.total_mass() * (kinetree::com_acceleration(tree, s.q, s.qd, s.qdd) - tree.gravity());
    EXPECT_LT((sol.wrench.force - expected).norm(), 1e-6);
  }
}

TEST_F(Surena, SspConditionStaysBoundedUpToPitchGuard) {
  // [B J^T] is block triangular; only the base Euler-rate map can degrade it.
  auto s = standing();
  s.q[4] = std::numbers::pi / 2 - 2 * kinetree::kPitchGuard;
  const auto sol = ssp_inverse_dynamics(tree, s, rf);
  EXPECT_GT(sol.condition, 100.0);
  EXPECT_LT(sol.condition, kMaxCondition);
}

TEST(CheckedSolve, SingularMatrixReportsCondition) {
  MatX a(2, 2);
  a << 1, 2, 2, 4 + 1e-12;
  try {
    checked_solve(a, VecX::Ones(2), "toy");
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_GE(e.condition(), kMaxCondition);
    EXPECT_NE(std::string(e.what()).find("toy"), std::string::npos);
  }
}

TEST_F(Surena, SymmetricDoubleStanceSplitsWeight) {
  const auto sol = dsp_inverse_dynamics(tree, standing(), lf, rf);
  EXPECT_NEAR(sol.left.force.z(), weight() / 2, 1e-6);
  EXPECT_NEAR(sol.right.force.z(), weight() / 2, 1e-6);
  EXPECT_LT(sol.residual, 1e-8);
  EXPECT_LT(sol.certificate, 1e-8);
  EXPECT_EQ(sol.rank, tree.dof());
}

TEST_F(Surena, DspMinimumNormAgainstSampledFamily) {
  std::mt19937 rng(5);
  const int na = tree.num_actuated();
  for (int trial = 0; trial < 5; ++trial) {
    const auto s = random_state(rng);
    const auto best = dsp_inverse_dynamics(tree, s, lf, rf);
    VecX x(na + 12);
    x << best.tau, best.left.stacked(), best.right.stacked();
    EXPECT_LT(best.certificate, 1e-8);
    EXPECT_LT(best.residual, 1e-8);
    for (int i = 0; i < 100; ++i) {
      const VecX k = testing::random_vec(na + 12, rng, 100.0);
      const auto other = dsp_inverse_dynamics(tree, s, lf, rf, k);
      EXPECT_LT(other.residual, 1e-7);
      VecX y(na + 12);
      y << other.tau, other.left.stacked(), other.right.stacked();
      EXPECT_LE(x.norm(), y.norm() + 1e-9);
    }
  }
}

TEST_F(Surena, DspMomentumBalance) {
  std::mt19937 rng(21);
  for (int i = 0; i < 100; ++i) {
    const auto s = random_state(rng);
    const auto sol = dsp_inverse_dynamics(tree, s, lf, rf);
    const Vec3 expected =
        tree.total_mass() * (kinetree::com_acceleration(tree, s.q, s.qd, s.qdd) - tree.gravity());
    EXPECT_LT((sol.left.force + sol.right.force - expected).norm(), 1e-6);
  }
}

TEST_F(Surena, StaticStanceIsFeasible) {
  const auto s = standing();
  const auto sol = ssp_inverse_dynamics(tree, s, rf);
  const int groups[] = {rf};
  const auto poly = support_polygon(tree, s.q, groups);
  EXPECT_NEAR(poly.area(), 0.265 * 0.160, 1e-9);
  const ContactWrench w[] = {sol.wrench};
  const auto rep = feasibility_check(w, poly, 0.8, sol.wrench.point.z());
  EXPECT_TRUE(rep.unilateral);
  EXPECT_TRUE(rep.friction);
  EXPECT_NEAR(rep.friction_margin, 0.8 * weight(), 1e-6);
  // Standing on one foot with the COM centred between the hips leaves the ZMP outside.
  EXPECT_FALSE(rep.zmp_inside);

  const auto dsp = dsp_inverse_dynamics(tree, s, lf, rf);
  const int both[] = {lf, rf};
  const ContactWrench w2[] = {dsp.left, dsp.right};
  EXPECT_TRUE(feasibility_check(w2, support_polygon(tree, s.q, both), 0.8, dsp.left.point.z()).zmp_inside);
}

TEST_F(Surena, FixedBaseModelIsRejected) {
  const auto pend = kinetree::build_tree(model_io::pendulum_chain({1.0}, {1.0}, {1.0}, {0.01}));
  EXPECT_THROW(ssp_inverse_dynamics(pend, GeneralizedState::zero(pend), 0), ValidationError);
}

TEST(MinNorm, ToySystem) {
  MatX c(1, 2);
  c << 1, 1;
  VecX d(1);
  d << 2;
  const auto sol = min_norm_solve(c, d);
  EXPECT_NEAR(sol.x(0), 1.0, 1e-14);
  EXPECT_NEAR(sol.x(1), 1.0, 1e-14);
  EXPECT_EQ(sol.rank, 1);
}

TEST(MinNorm, KSelectsAnotherSolution) {
  MatX c(1, 2);
  c << 1, 1;
  VecX d(1);
  d << 2;
  VecX k(2);
  k << 3, 0;
  const auto sol = min_norm_solve(c, d, k);
  EXPECT_NEAR(sol.x(0), 2.5, 1e-14);
  EXPECT_NEAR(sol.x(1), -0.5, 1e-14);
  EXPECT_NEAR(sol.certificate, 1.5, 1e-14);
}

TEST(MinNorm, RankDeficiencyReported) {
  MatX c(2, 3);
  c << 1, 2, 3, 2, 4, 6;
  try {
    min_norm_solve(c, VecX::Ones(2));
    FAIL();
  } catch (const RankError& e) {
    EXPECT_EQ(e.rank(), 1);
    EXPECT_EQ(e.expected(), 2);
  }
}

ContactWrench vertical(double fz, const Vec3& at) {
  ContactWrench w;
  w.force = Vec3(0, 0, fz);
  w.point = at;
  return w;
}

TEST(Zmp, PureForceAtPoint) {
  const ContactWrench w[] = {vertical(100, Vec3(0.3, -0.2, 0.0))};
  EXPECT_TRUE(zmp_from_wrenches(w, 0.0).isApprox(Vec2(0.3, -0.2)));
}

TEST(Zmp, MomentShiftsPoint) {
  ContactWrench w = vertical(100, Vec3::Zero());
  w.moment = Vec3(5.0, -10.0, 0.0);
  const ContactWrench ws[] = {w};
  EXPECT_TRUE(zmp_from_wrenches(ws, 0.0).isApprox(Vec2(0.1, 0.05)));
}

TEST(Zmp, EqualForcesGiveMidpoint) {
  const ContactWrench w[] = {vertical(300, Vec3(0, 0.1, 0)), vertical(300, Vec3(0.2, -0.1, 0))};
  EXPECT_TRUE(zmp_from_wrenches(w, 0.0).isApprox(Vec2(0.1, 0.0)));
}

TEST(Zmp, HorizontalForceAboveSoleHeight) {
  ContactWrench w = vertical(100, Vec3(0, 0, 0.05));
  w.force.x() = 20.0;
  const ContactWrench ws[] = {w};
  // Moment about the sole-height origin is 0.05 * 20 about +y.
  EXPECT_NEAR(zmp_from_wrenches(ws, 0.0).x(), -0.01, 1e-15);
}

TEST(Zmp, AirborneIsUndefined) {
  const ContactWrench w[] = {vertical(0.5, Vec3::Zero())};
  EXPECT_THROW(zmp_from_wrenches(w, 0.0), UndefinedZmp);
}

TEST(Polygon, HullAndMargins) {
  const std::vector<Vec2> pts = {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}, {0.5, 0}};
  const auto poly = convex_hull(pts);
  EXPECT_EQ(poly.vertices.size(), 4u);
  EXPECT_NEAR(poly.area(), 1.0, 1e-15);
  EXPECT_NEAR(poly.signed_margin(Vec2(0.5, 0.5)), 0.5, 1e-15);
  EXPECT_NEAR(poly.signed_margin(Vec2(0.9, 0.5)), 0.1, 1e-15);
  EXPECT_NEAR(poly.signed_margin(Vec2(2.0, 0.5)), -1.0, 1e-15);
  EXPECT_EQ(poly.signed_margin(Vec2(1.0, 0.3)), 0.0);
  EXPECT_FALSE(poly.strictly_contains(Vec2(1.0, 0.3)));
}

TEST(Feasibility, EdgeAndTensionCases) {
  const std::vector<Vec2> pts = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  const auto poly = convex_hull(pts);
  const ContactWrench edge[] = {vertical(100, Vec3(1.0, 0.5, 0))};
  const auto rep = feasibility_check(edge, poly, 0.8, 0.0);
  EXPECT_FALSE(rep.zmp_inside);
  EXPECT_EQ(rep.zmp_margin, 0.0);

  const ContactWrench pull[] = {vertical(200, Vec3(0.5, 0.5, 0)), vertical(-10, Vec3(0.5, 0.5, 0))};
  EXPECT_FALSE(feasibility_check(pull, poly, 0.8, 0.0).unilateral);

  ContactWrench slip = vertical(100, Vec3(0.5, 0.5, 0));
  slip.force.x() = 90.0;
  const ContactWrench s[] = {slip};
  const auto r2 = feasibility_check(s, poly, 0.8, 0.0);
  EXPECT_FALSE(r2.friction);
  EXPECT_NEAR(r2.friction_margin, -10.0, 1e-12);
}

}  // namespace
}  // namespace contactdyn::rigid
