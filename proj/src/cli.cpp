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

#include "contactdyn/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "contactdyn/batch.hpp"
#include "contactdyn/contact_models.hpp"
#include "contactdyn/csv.hpp"
#include "contactdyn/errors.hpp"
#include "contactdyn/gait.hpp"
#include "contactdyn/ident.hpp"
#include "contactdyn/model_io.hpp"
#include "contactdyn/sim.hpp"

namespace contactdyn::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr std::size_t kMaxListedWarnings = 10;

struct Context {
  fs::path out;
  int jobs = 0;
  std::ostream& report;
  std::ostream& diag;
};

// Typed read of a resolved config entry; type mismatches are usage errors.
template <typename T>
T get(const json& c, const std::string& key) {
  const json* node = &c;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->contains(part)) throw ValidationError("config key '" + key + "' is missing");
    node = &node->at(part);
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  try {
    return node->get<T>();
  } catch (const json::exception& e) {
    throw ValidationError("config key '" + key + "': " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

void write_manifest(const Context& ctx, const std::string& command, const json& config) {
  write_json(ctx.out / "manifest.json", json{{"format", 1}, {"command", command}, {"version", kVersion},
                                             {"config", config}});
}

bool is_preset(const std::string& name) {
  const auto names = model_io::preset_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

void resolve_paths(json& c) {
  for (const char* key : {"gait", "schedule", "drive", "meta", "table", "rigid"}) {
    if (c.contains(key)) c[key] = resolve_input(get<std::string>(c, key));
  }
  if (c.contains("model") && !is_preset(get<std::string>(c, "model"))) {
    c["model"] = resolve_input(get<std::string>(c, "model"));
  }
  if (c.contains("experiments")) {
    for (auto& e : c["experiments"]) e = resolve_input(e.get<std::string>());
  }
}

std::vector<std::string> joint_names(const kinetree::RigidBodyTree& tree) {
  std::vector<std::string> out;
  for (int j = 0; j < tree.num_actuated(); ++j) out.push_back(tree.coordinate_name(tree.num_base() + j));
  return out;
}

std::vector<std::string> wrench_columns(const std::string& prefix, const std::string& group) {
  std::vector<std::string> out;
  for (const char* c : {"fx", "fy", "fz", "mx", "my", "mz"}) out.push_back(prefix + group + "_" + c);
  return out;
}

void push_wrench(std::vector<double>& row, const ContactWrench& w) {
  for (int k = 0; k < 3; ++k) row.push_back(w.force[k]);
  for (int k = 0; k < 3; ++k) row.push_back(w.moment[k]);
}

gait::Trajectory load_gait(const json& c, const kinetree::RigidBodyTree& tree) {
  auto traj = gait::read_csv(get<std::string>(c, "gait"), tree.dof());
  const auto schedule = get<std::string>(c, "schedule");
  if (!schedule.empty()) gait::apply_schedule(traj, gait::read_schedule(schedule));
  return traj;
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream ss;
  ss << std::setprecision(precision) << v;
  return ss.str();
}

// ---------------------------------------------------------------- ball-drop

int ball_drop(const json& c, const Context& ctx) {
  const auto masses = get<std::vector<double>>(c, "masses");
  const auto speeds = get<std::vector<double>>(c, "velocities");
  const auto models = get<std::vector<std::string>>(c, "models");
  if (masses.empty()) throw ValidationError("ball-drop: the mass list is empty");
  if (speeds.empty()) throw ValidationError("ball-drop: the velocity list is empty");
  if (models.empty()) throw ValidationError("ball-drop: the model list is empty");
  for (double m : masses) {
    if (!(m > 0.0)) throw ValidationError("ball-drop: masses must be > 0, got " + csv::format(m));
  }
  for (double v : speeds) {
    if (!(v >= 0.0)) throw ValidationError("ball-drop: impact speeds must be >= 0, got " + csv::format(v));
  }

  sim::BallDropOptions opt;
  opt.radius = get<double>(c, "radius");
  opt.dt = get<double>(c, "dt");
  opt.duration = get<double>(c, "duration");
  opt.drop_height = get<double>(c, "drop_height");
  opt.decimation = get<int>(c, "decimation");

  std::vector<batch::BallCell> cells;
  for (const auto& model : models) {
    const auto params = contact::normal_from_json(model, c.at("params").at(model));
    for (double m : masses) {
      for (double v : speeds) cells.push_back({m, v, model, params});
    }
  }
  const auto results = batch::ball_sweep_parallel(cells, opt, ctx.jobs);

  const bool traces = get<bool>(c, "traces");
  if (traces) fs::create_directories(ctx.out / "traces");
  csv::Writer summary(ctx.out / "summary.csv",
                      "units: mass kg, speed m/s, penetration m, settling_time s, first_contact_force N",
                      {"model", "mass", "speed", "status", "steady_penetration", "max_penetration", "settling_time",
                       "first_contact_force"});
  ctx.report << std::left << std::setw(12) << "model" << std::setw(8) << "mass" << std::setw(8) << "speed"
             << std::setw(14) << "steady [mm]" << std::setw(12) << "max [mm]" << std::setw(14) << "settling [s]"
             << "wall [s]\n";
  int numeric = 0;
  int failed = 0;
  for (const auto& r : results) {
    const auto& cell = r.cell;
    std::string status = "ok";
    double nan = std::nan("");
    sim::BallDropSummary s{nan, nan, nan, nan, nan};
    if (r.result) {
      s = r.result->summary;
      if (traces) {
        const auto& tr = r.result->trace;
        csv::Writer w(ctx.out / "traces" /
                          (cell.model + "_m" + csv::format(cell.mass) + "_v" + csv::format(cell.speed) + ".csv"),
                      "units: t s, z m, vz m/s, depth m, fz N", {"t", "z", "vz", "depth", "fz"});
        for (std::size_t i = 0; i < tr.size(); ++i) {
          w.row(std::vector<double>{tr.t[i], tr.q[i][2], tr.qd[i][2], tr.depth[i].front(),
                                    tr.wrenches[i].front().force.z()});
        }
      }
    } else {
      status = r.numeric ? "numeric" : "error";
      (r.numeric ? numeric : failed)++;
      ctx.diag << "error: " << cell.model << " m=" << csv::format(cell.mass) << " v=" << csv::format(cell.speed)
               << ": " << r.error << '\n';
    }
    summary.row(std::vector<std::string>{cell.model, csv::format(cell.mass), csv::format(cell.speed), status,
                                         csv::format(s.steady_penetration), csv::format(s.max_penetration),
                                         csv::format(s.settling_time), csv::format(s.first_contact_force)});
    ctx.report << std::left << std::setw(12) << cell.model << std::setw(8) << fmt(cell.mass) << std::setw(8)
               << fmt(cell.speed);
    if (r.result) {
      ctx.report << std::setw(14) << fmt(1e3 * s.steady_penetration) << std::setw(12)
                 << fmt(1e3 * s.max_penetration) << std::setw(14) << fmt(s.settling_time) << fmt(s.wall_seconds, 3)
                 << '\n';
    } else {
      ctx.report << status << '\n';
    }
  }
  ctx.report << results.size() << " cells, " << numeric << " numeric failures, " << failed << " other failures\n";
  if (failed > 0) return kUsage;
  return numeric > 0 ? kNumeric : kOk;
}

// ---------------------------------------------------------------- invdyn

void write_invdyn(const fs::path& path, const kinetree::RigidBodyTree& tree, const gait::Trajectory& traj,
                  const std::vector<batch::InvdynRow>& rows) {
  std::vector<std::string> header{"t", "phase", "stance"};
  for (const auto& j : joint_names(tree)) header.push_back("tau_" + j);
  for (const auto& g : tree.contact_groups()) {
    for (auto& col : wrench_columns("F", g.name)) header.push_back(col);
  }
  for (const char* col : {"zmp_x", "zmp_y", "zmp_margin", "normal_margin", "friction_margin", "unilateral",
                          "friction_ok", "zmp_inside", "residual", "certificate"}) {
    header.emplace_back(col);
  }
  csv::Writer w(path,
                "units: t s, tau N m, force N, moment N m about the sole reference point, zmp m, "
                "zmp_margin m, normal_margin N, friction_margin N, flags 0/1",
                header);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    std::vector<double> v;
    for (int k = 0; k < r.tau.size(); ++k) v.push_back(r.tau[k]);
    for (const auto& wr : r.wrenches) push_wrench(v, wr);
    const auto& f = r.feasibility;
    const double nan = std::nan("");
    for (double x : {f.zmp ? f.zmp->x() : nan, f.zmp ? f.zmp->y() : nan, f.zmp_margin, f.normal_margin,
                     f.friction_margin, f.unilateral ? 1.0 : 0.0, f.friction ? 1.0 : 0.0, f.zmp_inside ? 1.0 : 0.0,
                     r.residual, r.certificate}) {
      v.push_back(x);
    }
    std::vector<std::string> cells{csv::format(r.t), gait::to_string(traj.samples[i].phase),
                                   gait::to_string(traj.samples[i].stance)};
    for (double x : v) cells.push_back(csv::format(x));
    w.row(cells);
  }
}

// Runs the rigid solve and writes invdyn.csv; returns the number of
// infeasible samples, each of which is reported as a warning.
int run_invdyn(const json& c, const Context& ctx, const kinetree::RigidBodyTree& tree, const gait::Trajectory& traj) {
  batch::InvdynOptions opt;
  opt.mu = get<double>(c, "mu");
  opt.sole_height = get<double>(c, "sole_height");
  const auto rows = batch::invdyn_parallel(tree, traj, opt, ctx.jobs);
  write_invdyn(ctx.out / "invdyn.csv", tree, traj, rows);

  int infeasible = 0;
  double residual = 0.0, certificate = 0.0, margin = 1e300;
  for (const auto& r : rows) {
    residual = std::max(residual, r.residual);
    certificate = std::max(certificate, r.certificate);
    margin = std::min(margin, r.feasibility.zmp_margin);
    const auto& f = r.feasibility;
    if (f.unilateral && f.friction && f.zmp_inside) continue;
    if (static_cast<std::size_t>(infeasible++) < kMaxListedWarnings) {
      ctx.diag << "warning: t=" << csv::format(r.t) << ":" << (f.unilateral ? "" : " negative normal force")
               << (f.friction ? "" : " outside the friction cone")
               << (f.zmp_inside ? "" : " ZMP not strictly inside the support polygon") << '\n';
    }
  }
  if (static_cast<std::size_t>(infeasible) > kMaxListedWarnings) {
    ctx.diag << "warning: " << infeasible - static_cast<int>(kMaxListedWarnings) << " more infeasible samples\n";
  }
  ctx.report << "rigid inverse dynamics: " << rows.size() << " samples, max residual " << fmt(residual, 3)
             << ", max null-space certificate " << fmt(certificate, 3) << ", min ZMP margin "
             << fmt(1e3 * margin, 4) << " mm, " << infeasible << " infeasible\n";
  return infeasible;
}

int invdyn(const json& c, const Context& ctx) {
  const auto tree = kinetree::build_tree(model_io::resolve_model(get<std::string>(c, "model")));
  const auto traj = load_gait(c, tree);
  run_invdyn(c, ctx, tree, traj);
  return kOk;
}

// ---------------------------------------------------------------- walk

sim::WalkOptions walk_options(const json& c, const kinetree::RigidBodyTree& tree) {
  sim::WalkOptions o;
  try {
    o.contact.normal = contact::normal_from_json(get<std::string>(c, "contact.normal.model"),
                                                 c.at("contact").at("normal").at("params"));
    const auto friction = get<std::string>(c, "contact.friction.model");
    if (friction == "none") {
      o.contact.friction.reset();
    } else {
      o.contact.friction = contact::friction_from_json(friction, c.at("contact").at("friction").at("params"));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("contact parameters: ") + e.what());
  }
  o.contact.ground_height = get<double>(c, "contact.ground_height");
  o.dt = get<double>(c, "dt");
  o.duration = get<double>(c, "duration");
  o.decimation = get<int>(c, "decimation");
  o.fall_fraction = get<double>(c, "fall_fraction");
  o.posture_gain = get<double>(c, "posture_gain");
  o.feedforward = get<bool>(c, "feedforward");
  const int na = tree.num_actuated();
  o.gains = sim::PdGains{VecX::Constant(na, get<double>(c, "gains.kp")), VecX::Constant(na, get<double>(c, "gains.kd"))};
  if (!(o.dt > 0.0)) throw ValidationError("walk: dt must be positive");
  const double bound = sim::max_stable_dt(tree, o.contact);
  if (o.dt > bound) {
    throw ValidationError("walk: dt = " + csv::format(o.dt) + " s exceeds the stability bound " + csv::format(bound) +
                          " s of the contact law (dt <= 0.2/omega, omega^2 = points * small-deflection stiffness / "
                          "link mass, minimised over contact groups)");
  }
  return o;
}

std::vector<std::optional<ident::DriveParams>> load_drives(const std::string& path,
                                                           const kinetree::RigidBodyTree& tree) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open drive file '" + path + "'");
  std::vector<std::optional<ident::DriveParams>> out(static_cast<std::size_t>(tree.num_actuated()));
  try {
    const json j = json::parse(in);
    for (auto it = j.at("drives").begin(); it != j.at("drives").end(); ++it) {
      const int idx = tree.actuated_index(it.key());
      ident::DriveParams p;
      for (const auto& name : it.value().at("basis")) p.basis.push_back(ident::parse_term(name.get<std::string>()));
      const auto values = it.value().at("values").get<std::vector<double>>();
      if (values.size() != p.basis.size()) throw DataError("joint '" + it.key() + "': basis and values differ in size");
      p.values = Eigen::Map<const VecX>(values.data(), static_cast<Eigen::Index>(values.size()));
      out[static_cast<std::size_t>(idx)] = p;
    }
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  } catch (const ValidationError& e) {
    throw DataError(path + ": " + e.what());
  }
  return out;
}

void write_trace(const fs::path& path, const kinetree::RigidBodyTree& tree, const sim::SimTrace& tr,
                 const std::vector<VecX>* total) {
  std::vector<std::string> header{"t"};
  for (int i = 0; i < tree.dof(); ++i) header.push_back("q_" + tree.coordinate_name(i));
  for (int i = 0; i < tree.dof(); ++i) header.push_back("qd_" + tree.coordinate_name(i));
  const auto joints = joint_names(tree);
  for (const auto& j : joints) header.push_back("tau_" + j);
  if (total) {
    for (const auto& j : joints) header.push_back("tau_total_" + j);
  }
  for (const auto& g : tr.group_names) {
    for (auto& col : wrench_columns("F", g)) header.push_back(col);
  }
  for (const char* col : {"zmp_x", "zmp_y", "contact_flags"}) header.emplace_back(col);
  csv::Writer w(path,
                "units: t s, q m or rad, qd m/s or rad/s, tau N m, force N, moment N m about the sole reference "
                "point, zmp m, contact_flags bit per group",
                header);
  for (std::size_t i = 0; i < tr.size(); ++i) {
    std::vector<double> v{tr.t[i]};
    for (int k = 0; k < tree.dof(); ++k) v.push_back(tr.q[i][k]);
    for (int k = 0; k < tree.dof(); ++k) v.push_back(tr.qd[i][k]);
    for (int k = 0; k < tr.tau[i].size(); ++k) v.push_back(tr.tau[i][k]);
    if (total) {
      for (int k = 0; k < (*total)[i].size(); ++k) v.push_back((*total)[i][k]);
    }
    for (const auto& wr : tr.wrenches[i]) push_wrench(v, wr);
    v.push_back(tr.zmp[i] ? tr.zmp[i]->x() : std::nan(""));
    v.push_back(tr.zmp[i] ? tr.zmp[i]->y() : std::nan(""));
    v.push_back(static_cast<double>(tr.contact_flags[i]));
    w.row(v);
  }
}

// Compliant minus rigid at every rigid sample that the trace also holds.
json write_deltas(const fs::path& path, const kinetree::RigidBodyTree& tree, const gait::Trajectory& traj,
                  const sim::SimTrace& tr, const fs::path& rigid_path) {
  const auto rigid = csv::read(rigid_path);
  const auto joints = joint_names(tree);
  std::vector<std::string> groups;
  for (const auto& g : tree.contact_groups()) groups.push_back(g.name);

  std::vector<std::string> names;
  for (const auto& j : joints) names.push_back("tau_" + j);
  for (const auto& g : groups) {
    for (auto& col : wrench_columns("F", g)) names.push_back(col);
  }
  names.emplace_back("zmp_x");
  names.emplace_back("zmp_y");
  std::vector<int> cols;
  for (const auto& n : names) cols.push_back(rigid.column(n));
  const int ct = rigid.column("t");

  std::vector<std::string> header{"t"};
  for (const auto& n : names) header.push_back("d" + n);
  csv::Writer w(path, "units: t s, deltas compliant minus rigid in the units of the source columns", header);

  const double t0 = traj.samples.front().t;
  const double tol = 1e-9 + 0.5 * (tr.size() > 1 ? tr.t[1] - tr.t[0] : 0.0);
  std::vector<double> sumsq(names.size(), 0.0);
  std::vector<std::size_t> count(names.size(), 0);
  std::size_t matched = 0;
  for (std::size_t r = 0; r < rigid.rows.size(); ++r) {
    const double t = rigid.number(r, ct);
    const auto it = std::lower_bound(tr.t.begin(), tr.t.end(), t - t0 - tol);
    if (it == tr.t.end() || std::abs(*it - (t - t0)) > tol) continue;
    const auto i = static_cast<std::size_t>(it - tr.t.begin());
    std::vector<double> compliant;
    for (int k = 0; k < tr.tau[i].size(); ++k) compliant.push_back(tr.tau[i][k]);
    for (const auto& wr : tr.wrenches[i]) push_wrench(compliant, wr);
    compliant.push_back(tr.zmp[i] ? tr.zmp[i]->x() : std::nan(""));
    compliant.push_back(tr.zmp[i] ? tr.zmp[i]->y() : std::nan(""));
    std::vector<double> row{t};
    for (std::size_t k = 0; k < names.size(); ++k) {
      const double d = compliant[k] - rigid.number(r, cols[k]);
      row.push_back(d);
      if (std::isfinite(d)) {
        sumsq[k] += d * d;
        ++count[k];
      }
    }
    w.row(row);
    ++matched;
  }
  json rms = json::object();
  for (std::size_t k = 0; k < names.size(); ++k) {
    rms[names[k]] = count[k] ? std::sqrt(sumsq[k] / static_cast<double>(count[k])) : 0.0;
  }
  return json{{"matched_samples", matched}, {"rms_delta", rms}};
}

int walk_pipeline(const json& c, const Context& ctx, bool with_rigid) {
  const auto tree = kinetree::build_tree(model_io::resolve_model(get<std::string>(c, "model")));
  const auto traj = load_gait(c, tree);
  const auto opt = walk_options(c, tree);

  std::string rigid = c.contains("rigid") ? get<std::string>(c, "rigid") : "";
  if (with_rigid) {
    run_invdyn(c, ctx, tree, traj);
    rigid = (ctx.out / "invdyn.csv").string();
  }

  const auto res = sim::run_walk(tree, traj, opt);
  const auto& tr = res.trace;
  const auto& s = res.summary;

  std::vector<VecX> total;
  const auto drive = get<std::string>(c, "drive");
  if (!drive.empty()) {
    const auto drives = load_drives(drive, tree);
    std::vector<VecX> qd;
    for (const auto& v : tr.qd) qd.push_back(v.segment(tree.num_base(), tree.num_actuated()));
    total = ident::add_drive_torques(tr.t, tr.tau, qd, drives);
  }
  write_trace(ctx.out / "trace.csv", tree, tr, drive.empty() ? nullptr : &total);

  json summary{{"fell", s.fell},
               {"fall_time", s.fall_time},
               {"simulated_time", s.simulated_time},
               {"rms_tracking_deg", s.rms_tracking_deg},
               {"max_tracking_deg", s.max_tracking_deg},
               {"min_normal_force", s.min_normal_force},
               {"max_penetration", s.max_penetration},
               {"steps", tr.steps},
               {"rejected_steps", s.rejected_steps}};

  const int window = get<int>(c, "zmp_window");
  if (!s.fell) {
    const auto z = sim::compare_zmp(tree, traj, tr, window);
    csv::Writer w(ctx.out / "zmp.csv", "units: t s, zmp m", {"t", "zmp_x", "zmp_y", "rigid_zmp_x", "rigid_zmp_y"});
    for (std::size_t i = 0; i < z.t.size(); ++i) {
      w.row(std::vector<double>{z.t[i], z.compliant[i].x(), z.compliant[i].y(), z.rigid[i].x(), z.rigid[i].y()});
    }
    summary["zmp_window"] = window;
    summary["compliant_zmp_variance"] = z.compliant_variance;
    summary["rigid_zmp_variance"] = z.rigid_variance;
  }
  if (!rigid.empty()) summary["compare"] = write_deltas(ctx.out / "compare.csv", tree, traj, tr, rigid);
  write_json(ctx.out / "summary.json", summary);

  for (const auto& warning : tr.warnings) ctx.diag << "warning: " << warning << '\n';
  ctx.report << "walk: " << (s.fell ? "FELL at t = " + fmt(s.fall_time) + " s" : "completed") << ", "
             << fmt(s.simulated_time) << " s simulated in " << fmt(s.wall_seconds, 3) << " s\n"
             << "  tracking error rms " << fmt(s.rms_tracking_deg) << " deg, max " << fmt(s.max_tracking_deg)
             << " deg\n"
             << "  min normal force " << fmt(s.min_normal_force) << " N, max penetration "
             << fmt(1e3 * s.max_penetration) << " mm, rejected steps " << s.rejected_steps << '\n';
  if (summary.contains("compliant_zmp_variance")) {
    ctx.report << "  ZMP fluctuation variance compliant " << fmt(summary["compliant_zmp_variance"].get<double>())
               << " m^2, rigid " << fmt(summary["rigid_zmp_variance"].get<double>()) << " m^2\n";
  }
  if (summary.contains("compare")) {
    ctx.report << "  compared " << summary["compare"]["matched_samples"].get<std::size_t>()
               << " samples against the rigid solve (compare.csv)\n";
  }
  return s.fell ? kFall : kOk;
}

// ---------------------------------------------------------------- identify

std::string cell(double v) { return fmt(v, 6); }

void print_table(std::ostream& os, const ident::Basis& basis, const std::vector<std::string>& names,
                 const std::vector<ident::DriveParams>& sets, const std::optional<ident::ConsistencyReport>& rep) {
  os << std::left << std::setw(16) << "experiment";
  for (auto t : basis) os << std::setw(14) << ident::parameter_name(t);
  os << '\n';
  for (std::size_t i = 0; i < sets.size(); ++i) {
    os << std::setw(16) << names[i];
    for (int k = 0; k < sets[i].values.size(); ++k) os << std::setw(14) << cell(sets[i].values[k]);
    os << '\n';
  }
  const char* labels[] = {"AVG", "STDV", "CM (%)"};
  for (int row = 0; row < 3; ++row) {
    os << std::setw(16) << labels[row];
    for (std::size_t k = 0; k < basis.size(); ++k) {
      std::string v = "n/a";
      if (rep) {
        const auto& st = rep->stats[k];
        if (row == 0) v = cell(st.avg);
        if (row == 1) v = cell(st.stdv);
        if (row == 2 && st.cm_percent) v = cell(*st.cm_percent);
      }
      os << std::setw(14) << v;
    }
    os << '\n';
  }
}

int identify(const json& c, const Context& ctx) {
  const auto table = get<std::string>(c, "table");
  const auto experiments = get<std::vector<std::string>>(c, "experiments");
  const double threshold = get<double>(c, "cm_threshold_percent");
  std::vector<std::string> names;
  std::vector<ident::DriveParams> sets;
  std::vector<std::string> joints;
  ident::Basis basis;

  if (!table.empty()) {
    if (!experiments.empty()) throw ValidationError("identify: give either experiments or a table, not both");
    const auto t = csv::read(table);
    const int ce = [&] {
      for (std::size_t i = 0; i < t.header.size(); ++i) {
        if (t.header[i] == "experiment") return static_cast<int>(i);
      }
      return -1;
    }();
    std::vector<int> cols;
    for (std::size_t i = 0; i < t.header.size(); ++i) {
      if (static_cast<int>(i) == ce) continue;
      try {
        basis.push_back(ident::parse_term(t.header[i]));
      } catch (const ValidationError& e) {
        throw DataError(table + ": " + e.what());
      }
      cols.push_back(static_cast<int>(i));
    }
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      ident::DriveParams p{basis, VecX(static_cast<Eigen::Index>(cols.size()))};
      for (std::size_t k = 0; k < cols.size(); ++k) p.values[static_cast<Eigen::Index>(k)] = t.number(r, cols[k]);
      sets.push_back(p);
      names.push_back(ce >= 0 ? t.rows[r][static_cast<std::size_t>(ce)] : std::to_string(r + 1));
    }
    if (sets.empty()) throw DataError(table + ": no rows");
  } else {
    if (experiments.empty()) throw ValidationError("identify: at least one experiment log is required");
    for (const auto& name : get<std::vector<std::string>>(c, "basis")) basis.push_back(ident::parse_term(name));
    const auto meta_path = get<std::string>(c, "meta");
    ident::DeriveOptions dopt;
    dopt.cutoff_hz = get<double>(c, "cutoff_hz");

    csv::Writer params(ctx.out / "params.csv", "units: SI drive parameters referred to the joint", [&] {
      std::vector<std::string> h{"experiment", "joint"};
      for (auto t : basis) h.push_back(ident::parameter_name(t));
      for (auto t : basis) h.push_back("se_" + ident::parameter_name(t));
      h.emplace_back("residual_rms");
      return h;
    }());
    for (const auto& path : experiments) {
      const std::string name = fs::path(path).stem().string();
      const auto log = ident::read_log(path);
      ident::DriveMeta meta;
      meta.joint = name;
      // Metadata: --meta, else <log>.json, else drive.json beside the log.
      const fs::path sibling = fs::path(path).replace_extension(".json");
      const fs::path shared = fs::path(path).parent_path() / "drive.json";
      if (!meta_path.empty()) {
        meta = ident::read_meta(meta_path);
      } else if (fs::exists(sibling)) {
        meta = ident::read_meta(sibling);
      } else if (fs::exists(shared)) {
        meta = ident::read_meta(shared);
      } else if (!log.current.empty()) {
        throw DataError(path + ": a current log needs drive metadata (--meta, " + sibling.filename().string() +
                        " or drive.json)");
      }
      if (meta.joint.empty()) meta.joint = name;
      ident::Fit fit;
      try {
        fit = ident::identify(ident::derive_kinematics(log, meta, dopt), basis);
      } catch (const RankError& e) {
        throw RankError("experiment '" + name + "': " + e.what(), e.rank(), e.expected());
      } catch (const ValidationError& e) {
        throw ValidationError("experiment '" + name + "': " + e.what());
      } catch (const Error& e) {
        if (dynamic_cast<const NumericError*>(&e)) throw NumericError("experiment '" + name + "': " + e.what());
        throw DataError("experiment '" + name + "': " + e.what());
      }
      std::vector<std::string> row{name, meta.joint};
      for (int k = 0; k < fit.params.values.size(); ++k) row.push_back(csv::format(fit.params.values[k]));
      for (int k = 0; k < fit.standard_errors.size(); ++k) row.push_back(csv::format(fit.standard_errors[k]));
      row.push_back(csv::format(fit.residual_rms));
      params.row(row);
      names.push_back(name);
      joints.push_back(meta.joint);
      sets.push_back(fit.params);
    }
  }

  std::optional<ident::ConsistencyReport> rep;
  if (sets.size() >= 2) rep = ident::consistency(sets);
  {
    csv::Writer w(ctx.out / "consistency.csv", "units: avg and stdv in parameter units, cm percent",
                  {"parameter", "avg", "stdv", "cm_percent"});
    for (std::size_t k = 0; k < basis.size(); ++k) {
      if (!rep) {
        w.row(std::vector<std::string>{ident::parameter_name(basis[k]), "nan", "nan", "nan"});
        continue;
      }
      const auto& st = rep->stats[k];
      w.row(std::vector<std::string>{ident::parameter_name(basis[k]), csv::format(st.avg), csv::format(st.stdv),
                                     csv::format(st.cm_percent ? *st.cm_percent : std::nan(""))});
    }
  }
  std::ostringstream text;
  print_table(text, basis, names, sets, rep);
  if (!rep) {
    text << "consistency: n/a (needs at least two experiments)\n";
  } else {
    std::string above;
    for (std::size_t k = 0; k < basis.size(); ++k) {
      const auto& cm = rep->stats[k].cm_percent;
      if (cm && *cm > threshold) above += " " + ident::parameter_name(basis[k]);
    }
    text << "consistency: CM threshold " << fmt(threshold) << "%, "
         << (above.empty() ? std::string("all parameters within") : "above:" + above) << '\n';
  }
  {
    std::ofstream f(ctx.out / "report.txt");
    if (!f) throw DataError("cannot write report.txt");
    f << text.str();
  }
  ctx.report << text.str();

  // Joint-wise averages, readable by `walk --drive`.
  if (!joints.empty()) {
    json drives = json::object();
    std::map<std::string, std::vector<ident::DriveParams>> by_joint;
    for (std::size_t i = 0; i < sets.size(); ++i) by_joint[joints[i]].push_back(sets[i]);
    for (const auto& [joint, list] : by_joint) {
      VecX avg = VecX::Zero(static_cast<Eigen::Index>(basis.size()));
      for (const auto& p : list) avg += p.values;
      avg /= static_cast<double>(list.size());
      json b = json::array();
      for (auto t : basis) b.push_back(ident::column_name(t));
      drives[joint] = json{{"basis", b}, {"values", std::vector<double>(avg.data(), avg.data() + avg.size())}};
    }
    write_json(ctx.out / "drives.json", json{{"format", 1}, {"drives", drives}});
  }
  return kOk;
}

// ---------------------------------------------------------------- front end

struct Parsed {
  std::string config_file;
  std::string out;
  std::vector<std::string> sets;
  int jobs = 0;
  // Convenience flags, applied as overrides in this order before --set.
  std::vector<std::pair<std::string, std::string>> flags;
};

void add_common(CLI::App* sub, Parsed& p) {
  sub->add_option("--config", p.config_file, "Config or manifest file (JSON)");
  sub->add_option("--out", p.out, "Output directory (default ./<command>-out)");
  sub->add_option("--set", p.sets, "Override an existing config key: dotted.key=value")->take_all();
  sub->add_option("--jobs", p.jobs, "Worker threads for parallel stages (0 = OpenMP default)")
      ->check(CLI::NonNegativeNumber);
}

void add_flag(CLI::App* sub, Parsed& p, const std::string& flag, const std::string& key, const std::string& help) {
  sub->add_option_function<std::string>(
      flag, [&p, key](const std::string& v) { p.flags.emplace_back(key, v); }, help);
}

int dispatch(const std::string& command, const json& config, const Context& ctx) {
  if (command == "ball-drop") return ball_drop(config, ctx);
  if (command == "invdyn") return invdyn(config, ctx);
  if (command == "walk") return walk_pipeline(config, ctx, false);
  if (command == "compare") return walk_pipeline(config, ctx, true);
  return identify(config, ctx);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Contact dynamics toolkit: compliant and rigid foot contact, ball impacts, drive identification",
               "contactdyn"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Parsed p;
  std::string param_set;
  std::map<std::string, CLI::App*> subs;

  auto* ball = app.add_subcommand("ball-drop", "Ball impact sweep over masses, impact speeds and normal laws");
  add_flag(ball, p, "--masses", "masses", "Comma separated masses in kg");
  add_flag(ball, p, "--velocities", "velocities", "Comma separated impact speeds in m/s");
  add_flag(ball, p, "--models", "models", "Comma separated normal laws, or 'all'");
  ball->add_option("--param-set", param_set, "Coefficient preset for every law: fig5-consistent or table1-raw");
  add_flag(ball, p, "--dt", "dt", "Integrator step in s");
  add_flag(ball, p, "--duration", "duration", "Simulated time per cell in s");
  subs["ball-drop"] = ball;

  auto* inv = app.add_subcommand("invdyn", "Rigid-contact inverse dynamics of a gait with feasibility report");
  subs["invdyn"] = inv;
  auto* walk = app.add_subcommand("walk", "Compliant-contact walking simulation of a gait");
  subs["walk"] = walk;
  auto* cmp = app.add_subcommand("compare", "Rigid solve plus compliant walk of one gait, with per-sample deltas");
  subs["compare"] = cmp;
  for (auto* sub : {inv, walk, cmp}) {
    add_flag(sub, p, "--gait", "gait", "Gait CSV (bundled name or path)");
    add_flag(sub, p, "--schedule", "schedule", "Phase schedule CSV (t, phase, stance)");
    add_flag(sub, p, "--model", "model", "Model preset name or model file");
  }
  for (auto* sub : {walk, cmp}) {
    add_flag(sub, p, "--dt", "dt", "Integrator step in s");
    add_flag(sub, p, "--duration", "duration", "Simulated time in s (negative: whole gait)");
    add_flag(sub, p, "--decimation", "decimation", "Trace every n-th step");
    add_flag(sub, p, "--drive", "drive", "Drive parameter file (drives.json from identify)");
  }
  add_flag(walk, p, "--compare", "rigid", "Rigid solve CSV from invdyn; writes compare.csv");

  auto* id = app.add_subcommand("identify", "Least-squares drive identification and consistency report");
  std::vector<std::string> experiments;
  id->add_option("experiments", experiments, "Experiment logs (t, theta and current or tau)");
  add_flag(id, p, "--meta", "meta", "Drive metadata JSON shared by every experiment");
  add_flag(id, p, "--basis", "basis", "Comma separated regressor columns");
  add_flag(id, p, "--cutoff", "cutoff_hz", "Low-pass cutoff in Hz for differentiation (<= 0 disables)");
  add_flag(id, p, "--table", "table", "Parameter table CSV fed to the consistency statistics only");
  subs["identify"] = id;

  for (auto& [name, sub] : subs) add_common(sub, p);

  std::vector<const char*> argv{"contactdyn"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  std::string command;
  for (auto& [name, sub] : subs) {
    if (sub->parsed()) command = name;
  }
  try {
    json config = default_config(command);
    if (!p.config_file.empty()) merge_config(config, load_config_file(p.config_file, command));
    if (!param_set.empty()) {
      for (auto& [model, block] : config["params"].items()) {
        block = contact::normal_to_json(contact::normal_preset(model, param_set));
      }
    }
    if (!experiments.empty()) {
      config["experiments"] = experiments;
    }
    for (const auto& [key, value] : p.flags) apply_override(config, key + "=" + value);
    for (const auto& s : p.sets) apply_override(config, s);
    if (config.contains("models") && config["models"] == json::array({"all"})) {
      config["models"] = contact::normal_model_names();
    }
    if (config.contains("models")) {
      for (const auto& m : config["models"]) {
        if (!m.is_string() || !config["params"].contains(m.get<std::string>())) {
          std::string names;
          for (const auto& n : contact::normal_model_names()) names += " " + n;
          throw ValidationError("unknown normal model " + m.dump() + "; catalog:" + names);
        }
      }
    }
    resolve_paths(config);

    Context ctx{p.out.empty() ? fs::path(command + "-out") : fs::path(p.out), p.jobs, out, err};
    std::error_code ec;
    fs::create_directories(ctx.out, ec);
    if (ec || !fs::is_directory(ctx.out)) {
      throw ValidationError("output directory '" + ctx.out.string() + "' cannot be created: " + ec.message());
    }
    write_manifest(ctx, command, config);
    return dispatch(command, config, ctx);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << '\n';
    return kNumeric;
  } catch (const BarrierViolation& e) {
    err << "error: " << e.what() << '\n';
    return kNumeric;
  } catch (const UndefinedZmp& e) {
    err << "error: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}

}  // namespace contactdyn::cli
