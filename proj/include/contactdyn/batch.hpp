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

#ifndef CONTACTDYN_BATCH_HPP_
#define CONTACTDYN_BATCH_HPP_

#include <optional>
#include <string>
#include <vector>

#include "contactdyn/gait.hpp"
#include "contactdyn/rigid_contact.hpp"
#include "contactdyn/sim.hpp"

// Data-parallel drivers. Each has a serial reference with identical output;
// parallel variants take `jobs` threads (0 = OpenMP default). Exceptions
// thrown inside a worker are rethrown on the caller, lowest index first.
namespace contactdyn::batch {

struct InvdynRow {
  double t = 0.0;
  VecX tau;
  std::vector<ContactWrench> wrenches;  // one per contact group; zero when unloaded
  rigid::FeasibilityReport feasibility;
  double residual = 0.0;
  double certificate = 0.0;  // DSP null-space certificate, 0 for SSP
};

struct InvdynOptions {
  double mu = 0.8;  // friction coefficient for the feasibility report
  double sole_height = 0.0;
};

// Rigid-contact solve of every sample, driven by its phase/stance labels.
std::vector<InvdynRow> invdyn_serial(const kinetree::RigidBodyTree& tree, const gait::Trajectory& traj,
                                     const InvdynOptions& options = {});
std::vector<InvdynRow> invdyn_parallel(const kinetree::RigidBodyTree& tree, const gait::Trajectory& traj,
                                       const InvdynOptions& options = {}, int jobs = 0);

struct BallCell {
  double mass = 0.0;
  double speed = 0.0;
  std::string model;  // catalog name, for reporting
  contact::NormalModelParams params;
};

struct BallCellResult {
  BallCell cell;
  std::optional<sim::BallDropResult> result;
  std::string error;   // non-empty when the run threw
  bool numeric = false;  // the error was a NumericError
};

// Cells that fail keep their error; the sweep itself does not throw.
std::vector<BallCellResult> ball_sweep_serial(const std::vector<BallCell>& cells, const sim::BallDropOptions& options = {});
std::vector<BallCellResult> ball_sweep_parallel(const std::vector<BallCell>& cells,
                                                const sim::BallDropOptions& options = {}, int jobs = 0);

}  // namespace contactdyn::batch

#endif  // CONTACTDYN_BATCH_HPP_
