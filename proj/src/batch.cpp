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

#include "contactdyn/batch.hpp"

#include <exception>

#include <omp.h>

#include "contactdyn/errors.hpp"

namespace contactdyn::batch {
namespace {

InvdynRow solve_sample(const kinetree::RigidBodyTree& tree, const gait::Sample& s, int lf, int rf,
                       const InvdynOptions& opt) {
  const kinetree::GeneralizedState st{s.q, s.qd, s.qdd, s.t};
  InvdynRow row;
  row.t = s.t;
  row.wrenches.resize(tree.contact_groups().size());
  std::vector<int> groups;
  if (s.stance == gait::Stance::Both) {
    const auto r = rigid::dsp_inverse_dynamics(tree, st, lf, rf);
    row.tau = r.tau;
    row.wrenches[lf] = r.left;
    row.wrenches[rf] = r.right;
    row.residual = r.residual;
    row.certificate = r.certificate;
    groups = {lf, rf};
  } else {
    const int g = s.stance == gait::Stance::Left ? lf : rf;
    const auto r = rigid::ssp_inverse_dynamics(tree, st, g);
    row.tau = r.tau;
    row.wrenches[g] = r.wrench;
    row.residual = r.residual;
    groups = {g};
  }
  for (std::size_t g = 0; g < row.wrenches.size(); ++g) {
    if (row.wrenches[g].force.isZero() && row.wrenches[g].moment.isZero()) {
      row.wrenches[g].point = rigid::reference_point(tree, s.q, static_cast<int>(g));
    }
  }
  std::vector<ContactWrench> loaded;
  for (int g : groups) loaded.push_back(row.wrenches[g]);
  row.feasibility =
      rigid::feasibility_check(loaded, rigid::support_polygon(tree, s.q, groups), opt.mu, opt.sole_height);
  return row;
}

BallCellResult run_cell(const BallCell& c, const sim::BallDropOptions& opt) {
  BallCellResult r;
  r.cell = c;
  try {
    r.result = sim::run_ball_drop(c.mass, c.speed, c.params, opt);
  } catch (const NumericError& e) {
    r.error = e.what();
    r.numeric = true;
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  return r;
}

int thread_count(int jobs) {
  if (jobs < 0) throw ValidationError("jobs must be >= 0");
  return jobs > 0 ? jobs : omp_get_max_threads();
}

void rethrow_first(const std::vector<std::exception_ptr>& errors) {
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

std::vector<InvdynRow> invdyn_serial(const kinetree::RigidBodyTree& tree, const gait::Trajectory& traj,
                                     const InvdynOptions& options) {
  const int lf = tree.contact_group_index("lf");
  const int rf = tree.contact_group_index("rf");
  std::vector<InvdynRow> rows;
  rows.reserve(traj.samples.size());
  for (const auto& s : traj.samples) rows.push_back(solve_sample(tree, s, lf, rf, options));
  return rows;
}

std::vector<InvdynRow> invdyn_parallel(const kinetree::RigidBodyTree& tree, const gait::Trajectory& traj,
                                       const InvdynOptions& options, int jobs) {
  const int threads = thread_count(jobs);
  const int lf = tree.contact_group_index("lf");
  const int rf = tree.contact_group_index("rf");
  const auto n = static_cast<long>(traj.samples.size());
  std::vector<InvdynRow> rows(static_cast<std::size_t>(n));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static) num_threads(threads)
  for (long i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      rows[k] = solve_sample(tree, traj.samples[k], lf, rf, options);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  rethrow_first(errors);
  return rows;
}

std::vector<BallCellResult> ball_sweep_serial(const std::vector<BallCell>& cells, const sim::BallDropOptions& options) {
  std::vector<BallCellResult> out;
  out.reserve(cells.size());
  for (const auto& c : cells) out.push_back(run_cell(c, options));
  return out;
}

std::vector<BallCellResult> ball_sweep_parallel(const std::vector<BallCell>& cells, const sim::BallDropOptions& options,
                                                int jobs) {
  const int threads = thread_count(jobs);
  const auto n = static_cast<long>(cells.size());
  std::vector<BallCellResult> out(static_cast<std::size_t>(n));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  // Cell cost varies with impact energy; hand cells out one at a time.
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (long i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      out[k] = run_cell(cells[k], options);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  rethrow_first(errors);
  return out;
}

}  // namespace contactdyn::batch
