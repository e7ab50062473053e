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

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "contactdyn/cli.hpp"
#include "contactdyn/csv.hpp"
#include "contactdyn/errors.hpp"

namespace contactdyn::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

Outcome invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Outcome o;
  o.code = run(args, out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("contactdyn_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string at(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

double column_value(const csv::Table& t, std::size_t row, const std::string& col) {
  return t.number(row, t.column(col));
}

TEST(Config, OverridesAreTypedAndChecked) {
  auto c = default_config("walk");
  apply_override(c, "dt=2e-5");
  apply_override(c, "decimation=4");
  apply_override(c, "feedforward=false");
  apply_override(c, "contact.normal.params.b_z=5e6");
  EXPECT_EQ(c["dt"].get<double>(), 2e-5);
  EXPECT_EQ(c["decimation"].get<int>(), 4);
  EXPECT_FALSE(c["feedforward"].get<bool>());
  EXPECT_EQ(c["contact"]["normal"]["params"]["b_z"].get<double>(), 5e6);
  EXPECT_THROW(apply_override(c, "decimation=2.5"), ValidationError);
  EXPECT_THROW(apply_override(c, "dt=fast"), ValidationError);
  EXPECT_THROW(apply_override(c, "contact.normal.params.stiffness=1"), ValidationError);
  EXPECT_THROW(apply_override(c, "missing"), ValidationError);

  auto b = default_config("ball-drop");
  apply_override(b, "masses=10,50");
  EXPECT_EQ(b["masses"], json::array({10.0, 50.0}));
  apply_override(b, "models=jackson");
  EXPECT_EQ(b["models"], json::array({"jackson"}));
  apply_override(b, "masses=");
  EXPECT_TRUE(b["masses"].empty());
}

TEST(Config, RenamingAContactLawResetsItsCoefficients) {
  auto c = default_config("walk");
  apply_override(c, "contact.normal.model=mclean");
  EXPECT_EQ(c["contact"]["normal"]["params"], json({{"k_z", 117000.0}, {"b_z", 2.8e6}}));

  auto d = default_config("walk");
  merge_config(d, json{{"contact", {{"normal", {{"model", "linear"}, {"params", {{"k_z", 1e5}, {"c_z", 500.0}}}}}}}});
  EXPECT_EQ(d["contact"]["normal"]["params"], json({{"k_z", 1e5}, {"c_z", 500.0}}));
  EXPECT_THROW(merge_config(d, json{{"gains", {{"ki", 1.0}}}}), ValidationError);
}

TEST_F(Cli, ManifestOfAnotherCommandIsRejected) {
  {
    std::ofstream f(at("m.json"));
    f << json{{"command", "walk"}, {"config", json::object()}}.dump();
  }
  EXPECT_THROW(load_config_file(at("m.json"), "invdyn"), ValidationError);
  EXPECT_NO_THROW(load_config_file(at("m.json"), "walk"));
  const auto o = invoke({"invdyn", "--config", at("m.json"), "--out", at("o")});
  EXPECT_EQ(o.code, kUsage);
}

TEST_F(Cli, DataRootFollowsTheEnvironment) {
  fs::create_directories(dir_ / "gaits");
  fs::copy_file(data_root() / "gaits" / "static_stand.csv", dir_ / "gaits" / "only_here.csv");
  ::setenv("CONTACTDYN_DATA", dir_.c_str(), 1);
  EXPECT_EQ(data_root(), dir_);
  const auto resolved = resolve_input("gaits/only_here.csv");
  ::unsetenv("CONTACTDYN_DATA");
  EXPECT_EQ(fs::path(resolved), dir_ / "gaits" / "only_here.csv");
  EXPECT_THROW(resolve_input("gaits/only_here.csv"), DataError);
}

TEST_F(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(invoke({"--help"}).code, kOk);
  EXPECT_EQ(invoke({}).code, kUsage);
  EXPECT_EQ(invoke({"fly"}).code, kUsage);
  EXPECT_EQ(invoke({"walk", "--jobs", "-2"}).code, kUsage);
  const auto o = invoke({"walk", "--set", "nope=1", "--out", at("o")});
  EXPECT_EQ(o.code, kUsage);
  EXPECT_NE(o.err.find("unknown config key 'nope'"), std::string::npos);
}

TEST_F(Cli, BallDropQuartet) {
  const auto o = invoke({"ball-drop", "--masses", "10,50", "--models", "mclean,tanbarrier", "--out", at("b")});
  ASSERT_EQ(o.code, kOk) << o.err;
  int traces = 0;
  for (const auto& e : fs::directory_iterator(dir_ / "b" / "traces")) traces += e.path().extension() == ".csv";
  EXPECT_EQ(traces, 4);
  const auto s = csv::read(dir_ / "b" / "summary.csv");
  ASSERT_EQ(s.rows.size(), 4u);
  // McLean: m g / k_z. Barrier: the preset's static penetrations.
  const double expected[] = {10 * 9.81 / 1.17e5, 50 * 9.81 / 1.17e5, 0.800e-3, 1.658e-3};
  for (std::size_t r = 0; r < 4; ++r) {
    EXPECT_EQ(s.rows[r][s.column("status")], "ok");
    EXPECT_NEAR(column_value(s, r, "steady_penetration"), expected[r], 0.02 * expected[r]) << r;
  }
}

TEST_F(Cli, BallDropCatalogAndUsage) {
  const auto all = invoke({"ball-drop", "--masses", "10", "--models", "all", "--duration", "0.02", "--out", at("a")});
  ASSERT_EQ(all.code, kOk) << all.err;
  EXPECT_EQ(csv::read(dir_ / "a" / "summary.csv").rows.size(), 7u);

  const auto unknown = invoke({"ball-drop", "--models", "mclean,rubber", "--out", at("u")});
  EXPECT_EQ(unknown.code, kUsage);
  EXPECT_NE(unknown.err.find("rubber"), std::string::npos);
  for (const char* name : {"linear", "wojtyra", "mclean", "jackson", "parkkwon", "millard", "tanbarrier"}) {
    EXPECT_NE(unknown.err.find(name), std::string::npos) << name;
  }
  EXPECT_EQ(invoke({"ball-drop", "--masses", "", "--out", at("e")}).code, kUsage);
  EXPECT_EQ(invoke({"ball-drop", "--masses", "-3", "--out", at("n")}).code, kUsage);
}

TEST_F(Cli, BallDropNumericFailureExitsThree) {
  const auto o =
      invoke({"ball-drop", "--masses", "50", "--velocities", "0.8", "--models", "tanbarrier", "--out", at("x")});
  EXPECT_EQ(o.code, kNumeric);
  const auto s = csv::read(dir_ / "x" / "summary.csv");
  ASSERT_EQ(s.rows.size(), 1u);
  EXPECT_EQ(s.rows[0][s.column("status")], "numeric");
}

TEST_F(Cli, RerunFromManifestIsBitIdentical) {
  ASSERT_EQ(invoke({"ball-drop", "--masses", "20", "--velocities", "0,0.3", "--models", "tanbarrier,jackson",
                    "--duration", "0.05", "--jobs", "2", "--out", at("first")})
                .code,
            kOk);
  ASSERT_EQ(invoke({"ball-drop", "--config", at("first/manifest.json"), "--out", at("second")}).code, kOk);
  for (const auto& e : fs::recursive_directory_iterator(dir_ / "first")) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), dir_ / "first");
    EXPECT_EQ(slurp(e.path()), slurp(dir_ / "second" / rel)) << rel;
  }

  ASSERT_EQ(invoke({"walk", "--duration", "0.3", "--out", at("w1")}).code, kOk);
  ASSERT_EQ(invoke({"walk", "--config", at("w1/manifest.json"), "--out", at("w2")}).code, kOk);
  for (const char* f : {"trace.csv", "zmp.csv", "summary.json", "manifest.json"}) {
    EXPECT_EQ(slurp(dir_ / "w1" / f), slurp(dir_ / "w2" / f)) << f;
  }
}

TEST_F(Cli, InvdynStaticStandIsConstantGravityCompensation) {
  ASSERT_EQ(invoke({"invdyn", "--gait", "gaits/static_stand.csv", "--out", at("s")}).code, kOk);
  const auto t = csv::read(dir_ / "s" / "invdyn.csv");
  ASSERT_GT(t.rows.size(), 10u);
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (!t.header[c].starts_with("tau_")) continue;
    for (std::size_t r = 1; r < t.rows.size(); ++r) {
      EXPECT_NEAR(t.number(r, static_cast<int>(c)), t.number(0, static_cast<int>(c)), 1e-6) << t.header[c];
    }
  }
  // The knees carry the body; the symmetric stance needs no yaw torque.
  EXPECT_LT(column_value(t, 0, "tau_l_knee"), -1.0);
  EXPECT_NEAR(column_value(t, 0, "tau_torso_yaw"), 0.0, 1e-9);
}

TEST_F(Cli, InvdynBundledGaitKeepsZmpStrictlyInside) {
  const auto o = invoke({"invdyn", "--out", at("g")});
  ASSERT_EQ(o.code, kOk) << o.err;
  EXPECT_TRUE(o.err.empty()) << o.err;
  const auto t = csv::read(dir_ / "g" / "invdyn.csv");
  ASSERT_GT(t.rows.size(), 300u);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    EXPECT_EQ(column_value(t, r, "zmp_inside"), 1.0) << r;
    EXPECT_GT(column_value(t, r, "zmp_margin"), 0.0) << r;
    EXPECT_LT(column_value(t, r, "residual"), 1e-8) << r;
  }
}

TEST_F(Cli, InvdynCsvRoundTripsLosslessly) {
  ASSERT_EQ(invoke({"invdyn", "--gait", "gaits/static_stand.csv", "--out", at("s")}).code, kOk);
  const auto t = csv::read(dir_ / "s" / "invdyn.csv");
  {
    csv::Writer w(dir_ / "copy.csv", t.units, t.header);
    for (const auto& row : t.rows) w.row(row);
  }
  EXPECT_EQ(slurp(dir_ / "s" / "invdyn.csv"), slurp(dir_ / "copy.csv"));
}

TEST_F(Cli, InvdynScheduleLengthMismatchIsDataError) {
  {
    std::ofstream f(at("schedule.csv"));
    f << "t,phase,stance\n0,dsp,both\n0.005,dsp,both\n0.01,dsp,both\n";
  }
  const auto o = invoke({"invdyn", "--gait", "gaits/static_stand.csv", "--schedule", at("schedule.csv"), "--out",
                         at("m")});
  EXPECT_EQ(o.code, kData);
  EXPECT_EQ(invoke({"invdyn", "--gait", "no/such.csv", "--out", at("n")}).code, kData);
}

TEST_F(Cli, WalkRejectsUnstableStep) {
  const auto o = invoke({"walk", "--dt", "1e-3", "--out", at("w")});
  EXPECT_EQ(o.code, kUsage);
  EXPECT_NE(o.err.find("stability bound"), std::string::npos) << o.err;
}

TEST_F(Cli, WalkComparesAgainstRigidSolve) {
  ASSERT_EQ(invoke({"invdyn", "--out", at("r")}).code, kOk);
  const auto o = invoke({"walk", "--duration", "0.5", "--compare", at("r/invdyn.csv"), "--out", at("w")});
  ASSERT_EQ(o.code, kOk) << o.err;
  const auto d = csv::read(dir_ / "w" / "compare.csv");
  EXPECT_EQ(d.rows.size(), 101u);  // 200 Hz rigid samples over 0.5 s
  EXPECT_EQ(d.header.front(), "t");
  EXPECT_NO_THROW(d.column("dtau_l_knee"));
  EXPECT_NO_THROW(d.column("dFrf_fz"));
  EXPECT_NO_THROW(d.column("dzmp_y"));
  // Quiet standing start: both pipelines carry the weight the same way.
  for (std::size_t r = 0; r < d.rows.size(); ++r) EXPECT_LT(std::abs(column_value(d, r, "dFlf_fz")), 20.0);
  const json s = json::parse(slurp(dir_ / "w" / "summary.json"));
  EXPECT_FALSE(s["fell"].get<bool>());
  EXPECT_EQ(s["compare"]["matched_samples"].get<int>(), 101);
}

TEST_F(Cli, WalkFallExitsTwo) {
  const auto o = invoke({"walk", "--set", "gains.kp=300", "--set", "gains.kd=5", "--set", "feedforward=false",
                         "--set", "fall_fraction=0.95", "--duration", "3", "--out", at("f")});
  EXPECT_EQ(o.code, kFall);
  EXPECT_TRUE(json::parse(slurp(dir_ / "f" / "summary.json"))["fell"].get<bool>());
}

TEST_F(Cli, BundledWalkScenarioCompletes) {
  const auto o = invoke({"walk", "--config", (data_root() / "scenarios" / "walk.json").string(), "--out", at("w")});
  ASSERT_EQ(o.code, kOk) << o.err;
  const json s = json::parse(slurp(dir_ / "w" / "summary.json"));
  EXPECT_NEAR(s["simulated_time"].get<double>(), 10.1, 1e-6);
  EXPECT_GE(s["min_normal_force"].get<double>(), 0.0);
  EXPECT_GT(s["compliant_zmp_variance"].get<double>(), s["rigid_zmp_variance"].get<double>());
}

TEST_F(Cli, CompareWritesBothPipelinesAndDriveTorques) {
  const auto o =
      invoke({"identify", "--config", (data_root() / "scenarios" / "identify_synthetic.json").string(), "--out",
              at("id")});
  ASSERT_EQ(o.code, kOk) << o.err;
  const auto c = invoke({"compare", "--duration", "0.3", "--drive", at("id/drives.json"), "--out", at("c")});
  ASSERT_EQ(c.code, kOk) << c.err;
  for (const char* f : {"invdyn.csv", "trace.csv", "compare.csv", "zmp.csv", "summary.json", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(dir_ / "c" / f)) << f;
  }
  const auto t = csv::read(dir_ / "c" / "trace.csv");
  // Only the knee has drive parameters; every other joint passes through.
  bool knee_differs = false;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    EXPECT_EQ(column_value(t, r, "tau_total_l_knee"), column_value(t, r, "tau_l_knee"));
    knee_differs |= column_value(t, r, "tau_total_r_knee") != column_value(t, r, "tau_r_knee");
  }
  EXPECT_TRUE(knee_differs);
}

TEST_F(Cli, IdentifySyntheticExperimentsAreConsistent) {
  const auto o =
      invoke({"identify", "--config", (data_root() / "scenarios" / "identify_synthetic.json").string(), "--out",
              at("id")});
  ASSERT_EQ(o.code, kOk) << o.err;
  EXPECT_NE(o.out.find("all parameters within"), std::string::npos) << o.out;
  const auto p = csv::read(dir_ / "id" / "params.csv");
  ASSERT_EQ(p.rows.size(), 5u);
  for (std::size_t r = 0; r < 5; ++r) {
    EXPECT_NEAR(column_value(p, r, "j"), 8.14, 0.05);
    EXPECT_NEAR(column_value(p, r, "b"), 87.34, 1.0);
    EXPECT_NEAR(column_value(p, r, "f"), 24.83, 2.5);
  }
  const auto c = csv::read(dir_ / "id" / "consistency.csv");
  for (std::size_t r = 0; r < c.rows.size(); ++r) EXPECT_LT(column_value(c, r, "cm_percent"), 10.0);
}

TEST_F(Cli, IdentifySingleExperimentHasNoConsistency) {
  const auto log = (data_root() / "ident" / "synthetic" / "exp1.csv").string();
  const auto o = invoke({"identify", log, "--out", at("one")});
  ASSERT_EQ(o.code, kOk) << o.err;
  EXPECT_NE(o.out.find("n/a"), std::string::npos);
  const auto c = csv::read(dir_ / "one" / "consistency.csv");
  for (std::size_t r = 0; r < c.rows.size(); ++r) EXPECT_TRUE(std::isnan(column_value(c, r, "avg")));
}

TEST_F(Cli, IdentifyTableFixtureReproducesStatistics) {
  const auto o = invoke({"identify", "--table", "ident/drive_table.csv", "--out", at("t")});
  ASSERT_EQ(o.code, kOk) << o.err;
  const auto c = csv::read(dir_ / "t" / "consistency.csv");
  ASSERT_EQ(c.rows.size(), 3u);
  EXPECT_NEAR(column_value(c, 1, "avg"), 87.34, 0.01);
  EXPECT_NEAR(column_value(c, 1, "stdv"), 21.67, 0.01);
  EXPECT_NEAR(column_value(c, 1, "cm_percent"), 24.8, 0.1);
  EXPECT_NEAR(column_value(c, 2, "avg"), 24.83, 0.01);
  EXPECT_NEAR(column_value(c, 2, "stdv"), 0.86, 0.01);
  EXPECT_NEAR(column_value(c, 2, "cm_percent"), 3.47, 0.1);
  // The j row is recomputed from its five entries.
  EXPECT_NEAR(column_value(c, 0, "avg"), 8.14, 0.01);
  EXPECT_NEAR(column_value(c, 0, "stdv"), 4.07, 0.01);
}

TEST_F(Cli, IdentifyRankDeficiencyNamesTheExperiment) {
  {
    csv::Writer w(dir_ / "ramp.csv", "units: t s, theta rad, tau N m", {"t", "theta", "tau"});
    for (int i = 0; i <= 400; ++i) {
      const double t = i * 1e-3;
      w.row(std::vector<double>{t, 0.5 * t, 3.0});
    }
  }
  const auto o = invoke({"identify", at("ramp.csv"), "--cutoff", "0", "--out", at("r")});
  EXPECT_EQ(o.code, kNumeric);
  EXPECT_NE(o.err.find("ramp"), std::string::npos) << o.err;
  EXPECT_NE(o.err.find("collinear"), std::string::npos) << o.err;
  EXPECT_EQ(invoke({"identify", "--out", at("none")}).code, kUsage);
}

}  // namespace
}  // namespace contactdyn::cli
