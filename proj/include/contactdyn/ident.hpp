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

#ifndef CONTACTDYN_IDENT_HPP_
#define CONTACTDYN_IDENT_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "contactdyn/types.hpp"

namespace contactdyn::ident {

// Regressor columns of the drive model tau = j*thdd + b*thd + c*thd^3 + f*sign(thd).
enum class Term { Accel, Vel, VelCubed, Sign };
using Basis = std::vector<Term>;

std::string column_name(Term t);     // "theta_dd", "theta_d", "theta_d3", "sign_theta_d"
std::string parameter_name(Term t);  // "j", "b", "c", "f"
Term parse_term(const std::string& name);  // accepts either spelling
Basis default_basis();                     // {Accel, Vel, Sign}

struct DriveMeta {
  std::string joint;
  double pulley_ratio = 1.0;    // N_p
  double harmonic_ratio = 1.0;  // N_h
  double motor_constant = 1.0;  // k_m, N m/A
  double torque_per_amp() const { return pulley_ratio * harmonic_ratio * motor_constant; }
};

// Encoder log: angle plus either joint torque or motor current.
struct RawLog {
  std::vector<double> t;
  std::vector<double> theta;
  std::vector<double> tau;      // used when current is empty
  std::vector<double> current;  // converted with DriveMeta::torque_per_amp
};

struct KinematicSample {
  double t = 0.0;
  double theta = 0.0;
  double theta_d = 0.0;
  double theta_dd = 0.0;
  double tau = 0.0;
};

struct RegressionDataset {
  std::vector<KinematicSample> samples;
  DriveMeta meta;
};

struct DeriveOptions {
  double cutoff_hz = 20.0;  // two-pass 2nd-order Butterworth; <= 0 disables
};

// Zero-phase low-pass of uniformly sampled data (forward-backward biquad
// with odd-reflection padding and steady-state initial conditions).
std::vector<double> filtfilt_lowpass(const std::vector<double>& x, double sample_rate, double cutoff_hz);

RegressionDataset derive_kinematics(const RawLog& log, const DriveMeta& meta, const DeriveOptions& options = {});

double regressor_entry(Term term, double theta_dd, double theta_d);

// m x n, columns in basis order. Requires m > n.
MatX build_regressor(const RegressionDataset& data, const Basis& basis);

struct DriveParams {
  Basis basis;
  VecX values;  // aligned with basis

  // Coefficient of `term`, zero when the term is not in the basis.
  double coefficient(Term term) const;
};

struct Fit {
  DriveParams params;
  VecX standard_errors;
  double residual_rms = 0.0;
};

// Least squares through the left pseudo-inverse. Rank deficiency raises
// RankError naming the columns involved.
Fit identify(const MatX& regressor, const VecX& tau, const Basis& basis);
Fit identify(const RegressionDataset& data, const Basis& basis = default_basis());

struct ParameterStats {
  double avg = 0.0;
  double stdv = 0.0;               // population, divisor n
  std::optional<double> cm_percent;  // absent when avg == 0
};

struct ConsistencyReport {
  Basis basis;
  std::vector<ParameterStats> stats;  // aligned with basis
};

ConsistencyReport consistency(const std::vector<DriveParams>& sets);

double predict_drive_torque(const DriveParams& params, double theta_dd, double theta_d);

// Adds per-joint drive torques to a logged torque series. Joint
// accelerations come from central differences of qd over t.
std::vector<VecX> add_drive_torques(const std::vector<double>& t, const std::vector<VecX>& tau,
                                    const std::vector<VecX>& qd, const std::vector<std::optional<DriveParams>>& drives);

// CSV with columns t, theta and one of current or tau.
RawLog read_log(const std::filesystem::path& path);
// JSON object {"joint", "pulley_ratio", "harmonic_ratio", "motor_constant"}.
DriveMeta read_meta(const std::filesystem::path& path);

}  // namespace contactdyn::ident

#endif  // CONTACTDYN_IDENT_HPP_
