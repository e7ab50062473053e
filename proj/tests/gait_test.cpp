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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "contactdyn/csv.hpp"
#include "contactdyn/errors.hpp"
#include "contactdyn/model_io.hpp"
#include "contactdyn/rigid_contact.hpp"

namespace contactdyn::gait {
namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("contactdyn_" + name);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class SurenaGait : public ::testing::Test {
 protected:
  kinetree::RigidBodyTree tree = kinetree::build_tree(model_io::preset("surena-lower"));
};

TEST(Csv, FormatRoundTripsDoubles) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, i % 20 - 10);
    EXPECT_EQ(std::stod(csv::format(v)), v);
  }
  EXPECT_EQ(csv::format(std::nan("")), "nan");
}

TEST(Csv, WriterReaderRoundTrip) {
  const auto dir = scratch_dir("csv");
  {
    csv::Writer w(dir / "a.csv", "units: s, m", {"t", "x"});
    w.row(std::vector<double>{0.1, 1.0 / 3.0});
    w.row(std::vector<std::string>{"0.2", "-4"});
  }
  const auto t = csv::read(dir / "a.csv");
  EXPECT_EQ(t.units, "units: s, m");
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.number(0, t.column("x")), 1.0 / 3.0);
  EXPECT_THROW(t.column("y"), DataError);
  {
    std::ofstream f(dir / "b.csv");
    f << "t,x\n1,2,3\n";
  }
  EXPECT_THROW(csv::read(dir / "b.csv"), DataError);
  std::filesystem::remove_all(dir);
}

TEST_F(SurenaGait, LegIkPlacesFlatSole) {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> dx(-0.15, 0.15), dz(0.72, 0.84);
  const int lf = tree.contact_group_index("lf");
  const int rf = tree.contact_group_index("rf");
  for (int trial = 0; trial < 50; ++trial) {
    const Vec3 pelvis(dx(rng), 0.3 * dx(rng), dz(rng));
    const Vec3 left(dx(rng), 0.115 + 0.2 * dx(rng), 0.3 * dx(rng) + 0.05);
    const Vec3 right(dx(rng), -0.115 + 0.2 * dx(rng), 0.0);
    VecX q = VecX::Zero(tree.dof());
    q.head<3>() = pelvis;
    q.segment<6>(tree.num_base() + tree.actuated_index("l_hip_yaw")) = leg_ik(pelvis, left, true);
    q.segment<6>(tree.num_base() + tree.actuated_index("r_hip_yaw")) = leg_ik(pelvis, right, false);
    EXPECT_LT((rigid::reference_point(tree, q, lf) - left).norm(), 1e-10);
    EXPECT_LT((rigid::reference_point(tree, q, rf) - right).norm(), 1e-10);
    const auto poses = kinetree::forward_kinematics(tree, q);
    for (int g : {lf, rf}) {
      EXPECT_LT((poses[tree.contact_groups()[g].link].rotation - Mat3::Identity()).norm(), 1e-10);
    }
  }
}

TEST_F(SurenaGait, GeneratedWalkShape) {
  const auto walk = generate_walk(tree);
  EXPECT_EQ(walk.samples.size(), 2021u);
  EXPECT_NEAR(walk.duration(), 10.1, 1e-12);
  const int lf = tree.contact_group_index("lf");
  const int rf = tree.contact_group_index("rf");
  int ssp = 0;
  for (const auto& s : walk.samples) {
    EXPECT_EQ(s.phase == Phase::Dsp, s.stance == Stance::Both);
    if (s.stance != Stance::Right) EXPECT_NEAR(rigid::reference_point(tree, s.q, lf).z(), 0.0, 1e-9);
    if (s.stance != Stance::Left) EXPECT_NEAR(rigid::reference_point(tree, s.q, rf).z(), 0.0, 1e-9);
    ssp += s.phase == Phase::Ssp ? 1 : 0;
  }
  EXPECT_GT(ssp, 900);
  // Forward progress: 6 steps at 0.5 km/h.
  const double travel = rigid::reference_point(tree, walk.samples.back().q, lf).x();
  EXPECT_GT(travel, 0.5);
}

TEST_F(SurenaGait, BundledGaitIsReproducedByTheGenerator) {
  const auto dir = scratch_dir("gait");
  write_csv(dir / "walk.csv", generate_walk(tree));
  write_csv(dir / "stand.csv", generate_stand(tree));
  const std::filesystem::path data(CONTACTDYN_DEFAULT_DATA_DIR);
  EXPECT_EQ(slurp(dir / "walk.csv"), slurp(data / "gaits" / "gait_0p5kmh.csv"));
  EXPECT_EQ(slurp(dir / "stand.csv"), slurp(data / "gaits" / "static_stand.csv"));
  std::filesystem::remove_all(dir);
}

TEST_F(SurenaGait, CsvRoundTripIsLossless) {
  const auto dir = scratch_dir("gait_rt");
  const auto a = generate_stand(tree, 0.2);
  write_csv(dir / "a.csv", a);
  const auto b = read_csv(dir / "a.csv", tree.dof());
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    EXPECT_EQ(a.samples[i].t, b.samples[i].t);
    EXPECT_EQ(a.samples[i].q, b.samples[i].q);
    EXPECT_EQ(a.samples[i].qdd, b.samples[i].qdd);
    EXPECT_EQ(a.samples[i].stance, b.samples[i].stance);
  }
  EXPECT_THROW(read_csv(dir / "a.csv", 7), DataError);
  std::filesystem::remove_all(dir);
}

TEST(Trajectory, InterpolationClampsAndBlends) {
  Trajectory tr;
  tr.samples.push_back({0.0, VecX::Constant(1, 0.0), VecX::Constant(1, 1.0), VecX::Zero(1), Phase::Dsp, Stance::Both});
  tr.samples.push_back({1.0, VecX::Constant(1, 2.0), VecX::Constant(1, 3.0), VecX::Zero(1), Phase::Dsp, Stance::Both});
  VecX q, qd;
  tr.interpolate(0.25, q, qd);
  EXPECT_DOUBLE_EQ(q[0], 0.5);
  EXPECT_DOUBLE_EQ(qd[0], 1.5);
  tr.interpolate(7.0, q, qd);
  EXPECT_DOUBLE_EQ(q[0], 2.0);
  tr.interpolate(-1.0, q, qd);
  EXPECT_DOUBLE_EQ(q[0], 0.0);
}

TEST(Schedule, ReplacesLabelsAndChecksShape) {
  Trajectory tr;
  for (int i = 0; i < 3; ++i) {
    tr.samples.push_back({0.1 * i, VecX::Zero(1), VecX::Zero(1), VecX::Zero(1), Phase::Dsp, Stance::Both});
  }
  std::vector<ScheduleEntry> s{{0.0, Phase::Dsp, Stance::Both}, {0.1, Phase::Ssp, Stance::Left},
                               {0.2, Phase::Ssp, Stance::Right}};
  apply_schedule(tr, s);
  EXPECT_EQ(tr.samples[1].stance, Stance::Left);
  EXPECT_EQ(tr.samples[2].phase, Phase::Ssp);

  auto short_s = s;
  short_s.pop_back();
  EXPECT_THROW(apply_schedule(tr, short_s), DataError);
  auto shifted = s;
  shifted[2].t = 0.25;
  EXPECT_THROW(apply_schedule(tr, shifted), DataError);
  auto conflict = s;
  conflict[1].stance = Stance::Both;
  EXPECT_THROW(apply_schedule(tr, conflict), DataError);

  const auto dir = scratch_dir("sched");
  {
    std::ofstream f(dir / "s.csv");
    f << "# s\nt,phase,stance\n0,dsp,both\n0.1,ssp,lf\n0.2,ssp,rf\n";
    std::ofstream g(dir / "bad.csv");
    g << "t,phase,stance\n0,walk,both\n";
  }
  const auto read = read_schedule(dir / "s.csv");
  ASSERT_EQ(read.size(), 3u);
  EXPECT_EQ(read[2].stance, Stance::Right);
  EXPECT_THROW(read_schedule(dir / "bad.csv"), DataError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace contactdyn::gait
