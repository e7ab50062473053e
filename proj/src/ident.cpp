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

#include "contactdyn/ident.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include <Eigen/SVD>

#include "json.hpp"

#include "contactdyn/csv.hpp"
#include "contactdyn/errors.hpp"

namespace contactdyn::ident {
namespace {

double sign0(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

struct Biquad {
  double b0, b1, b2, a1, a2;

  // Output for input held at x forever, as transposed direct-form-II state.
  std::pair<double, double> steady_state(double x) const {
    const double gain = (b0 + b1 + b2) / (1.0 + a1 + a2);
    const double z2 = (b2 - a2 * gain) * x;
    const double z1 = (b1 - a1 * gain) * x + z2;
    return {z1, z2};
  }

  void run(std::vector<double>& x) const {
    auto [z1, z2] = steady_state(x.front());
    for (double& v : x) {
      const double y = b0 * v + z1;
      z1 = b1 * v - a1 * y + z2;
      z2 = b2 * v - a2 * y;
      v = y;
    }
  }
};

Biquad butterworth_lowpass(double sample_rate, double cutoff_hz) {
  const double k = std::tan(std::numbers::pi * cutoff_hz / sample_rate);
  const double norm = 1.0 / (1.0 + std::numbers::sqrt2 * k + k * k);
  const double b0 = k * k * norm;
  return {b0, 2.0 * b0, b0, 2.0 * (k * k - 1.0) * norm, (1.0 - std::numbers::sqrt2 * k + k * k) * norm};
}

void check_time(const std::vector<double>& t) {
  if (t.size() < 5) throw DataError("derive_kinematics: need at least 5 samples, got " + std::to_string(t.size()));
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (!(t[i] > t[i - 1])) {
      throw DataError("derive_kinematics: time is not strictly increasing at sample " + std::to_string(i));
    }
  }
}

// First derivative: three-point formulas valid on non-uniform grids.
std::vector<double> differentiate(const std::vector<double>& t, const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> d(n);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h1 = t[i] - t[i - 1];
    const double h2 = t[i + 1] - t[i];
    d[i] = (h1 * h1 * (x[i + 1] - x[i]) + h2 * h2 * (x[i] - x[i - 1])) / (h1 * h2 * (h1 + h2));
  }
  auto one_sided = [&](std::size_t a, std::size_t b, std::size_t c) {
    // Derivative at t[a] through (a, b, c).
    const double h1 = t[b] - t[a];
    const double h2 = t[c] - t[a];
    return (h2 * h2 * (x[b] - x[a]) - h1 * h1 * (x[c] - x[a])) / (h1 * h2 * (h2 - h1));
  };
  d[0] = one_sided(0, 1, 2);
  d[n - 1] = one_sided(n - 1, n - 2, n - 3);
  return d;
}

}  // namespace

std::string column_name(Term t) {
  switch (t) {
    case Term::Accel: return "theta_dd";
    case Term::Vel: return "theta_d";
    case Term::VelCubed: return "theta_d3";
    case Term::Sign: return "sign_theta_d";
  }
  return "?";
}

std::string parameter_name(Term t) {
  switch (t) {
    case Term::Accel: return "j";
    case Term::Vel: return "b";
    case Term::VelCubed: return "c";
    case Term::Sign: return "f";
  }
  return "?";
}

Term parse_term(const std::string& name) {
  for (Term t : {Term::Accel, Term::Vel, Term::VelCubed, Term::Sign}) {
    if (name == column_name(t) || name == parameter_name(t)) return t;
  }
  throw ValidationError("unknown regressor term '" + name + "' (expected theta_dd|theta_d|theta_d3|sign_theta_d)");
}

Basis default_basis() { return {Term::Accel, Term::Vel, Term::Sign}; }

std::vector<double> filtfilt_lowpass(const std::vector<double>& x, double sample_rate, double cutoff_hz) {
  if (!(cutoff_hz > 0.0) || !(cutoff_hz < 0.5 * sample_rate)) {
    throw ValidationError("filtfilt_lowpass: cutoff " + std::to_string(cutoff_hz) + " Hz must lie in (0, " +
                          std::to_string(0.5 * sample_rate) + ") Hz");
  }
  const auto n = static_cast<long>(x.size());
  if (n < 2) return x;
  const Biquad f = butterworth_lowpass(sample_rate, cutoff_hz);
  // Three time constants of padding, odd-reflected about each end.
  const long pad = std::min(n - 1, std::max(9L, std::lround(3.0 * sample_rate / cutoff_hz)));
  std::vector<double> y;
  y.reserve(static_cast<std::size_t>(n + 2 * pad));
  for (long i = pad; i >= 1; --i) y.push_back(2.0 * x.front() - x[i]);
  y.insert(y.end(), x.begin(), x.end());
  for (long i = n - 2; i >= n - 1 - pad; --i) y.push_back(2.0 * x.back() - x[i]);
  f.run(y);
  std::reverse(y.begin(), y.end());
  f.run(y);
  std::reverse(y.begin(), y.end());
  return {y.begin() + pad, y.begin() + pad + n};
}

RegressionDataset derive_kinematics(const RawLog& log, const DriveMeta& meta, const DeriveOptions& options) {
  check_time(log.t);
  const std::size_t n = log.t.size();
  const bool from_current = !log.current.empty();
  const auto& load = from_current ? log.current : log.tau;
  if (log.theta.size() != n || load.size() != n) {
    throw DataError("derive_kinematics: t, theta and " + std::string(from_current ? "current" : "tau") +
                    " must have equal lengths");
  }
  std::vector<double> theta = log.theta;
  if (options.cutoff_hz > 0.0) {
    const double rate = static_cast<double>(n - 1) / (log.t.back() - log.t.front());
    theta = filtfilt_lowpass(theta, rate, options.cutoff_hz);
  }
  const auto vel = differentiate(log.t, theta);
  const auto acc = differentiate(log.t, vel);
  RegressionDataset d;
  d.meta = meta;
  d.samples.resize(n);
  const double scale = from_current ? meta.torque_per_amp() : 1.0;
  for (std::size_t i = 0; i < n; ++i) d.samples[i] = {log.t[i], theta[i], vel[i], acc[i], scale * load[i]};
  return d;
}

double regressor_entry(Term term, double theta_dd, double theta_d) {
  switch (term) {
    case Term::Accel: return theta_dd;
    case Term::Vel: return theta_d;
    case Term::VelCubed: return theta_d * theta_d * theta_d;
    case Term::Sign: return sign0(theta_d);
  }
  return 0.0;
}

MatX build_regressor(const RegressionDataset& data, const Basis& basis) {
  if (basis.empty()) throw ValidationError("build_regressor: basis is empty");
  for (std::size_t i = 0; i < basis.size(); ++i) {
    if (std::count(basis.begin(), basis.end(), basis[i]) > 1) {
      throw ValidationError("build_regressor: duplicate term " + column_name(basis[i]));
    }
  }
  const auto m = static_cast<long>(data.samples.size());
  const auto n = static_cast<long>(basis.size());
  if (m <= n) {
    throw ValidationError("build_regressor: under-determined, " + std::to_string(m) +
                          " samples must exceed " + std::to_string(n) + " basis terms");
  }
  MatX a(m, n);
  for (long i = 0; i < m; ++i) {
    const auto& s = data.samples[static_cast<std::size_t>(i)];
    for (long j = 0; j < n; ++j) a(i, j) = regressor_entry(basis[static_cast<std::size_t>(j)], s.theta_dd, s.theta_d);
  }
  return a;
}

double DriveParams::coefficient(Term term) const {
  for (std::size_t i = 0; i < basis.size(); ++i) {
    if (basis[i] == term) return values[static_cast<long>(i)];
  }
  return 0.0;
}

Fit identify(const MatX& a, const VecX& tau, const Basis& basis) {
  const long m = a.rows();
  const long n = a.cols();
  if (n != static_cast<long>(basis.size())) throw ValidationError("identify: basis does not match regressor columns");
  if (tau.size() != m) throw ValidationError("identify: torque vector length differs from regressor rows");
  if (m <= n) throw ValidationError("identify: under-determined, need more samples than basis terms");

  Eigen::JacobiSVD<MatX> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VecX& s = svd.singularValues();
  const double tol = 1e-10 * std::max(s(0), 1e-300);
  int rank = 0;
  for (long i = 0; i < s.size(); ++i) rank += s(i) > tol ? 1 : 0;
  if (s(0) == 0.0) rank = 0;
  if (rank < n) {
    std::vector<bool> involved(static_cast<std::size_t>(n), false);
    for (long k = rank; k < n; ++k) {
      for (long j = 0; j < n; ++j) involved[static_cast<std::size_t>(j)] = involved[static_cast<std::size_t>(j)] ||
                                                                       std::abs(svd.matrixV()(j, k)) > 1e-6;
    }
    std::string names;
    for (long j = 0; j < n; ++j) {
      if (!involved[static_cast<std::size_t>(j)]) continue;
      if (!names.empty()) names += ", ";
      names += column_name(basis[static_cast<std::size_t>(j)]);
    }
    throw RankError("identify: regressor rank " + std::to_string(rank) + " < " + std::to_string(n) +
                        "; collinear columns: " + names,
                    rank, static_cast<int>(n));
  }

  Fit fit;
  fit.params.basis = basis;
  fit.params.values = svd.solve(tau);
  const VecX r = a * fit.params.values - tau;
  fit.residual_rms = std::sqrt(r.squaredNorm() / static_cast<double>(m));
  const double sigma2 = r.squaredNorm() / static_cast<double>(m - n);
  const MatX vs = svd.matrixV() * s.cwiseInverse().asDiagonal();
  fit.standard_errors = (sigma2 * vs.rowwise().squaredNorm()).cwiseSqrt();
  return fit;
}

Fit identify(const RegressionDataset& data, const Basis& basis) {
  const MatX a = build_regressor(data, basis);
  VecX tau(a.rows());
  for (long i = 0; i < a.rows(); ++i) tau[i] = data.samples[static_cast<std::size_t>(i)].tau;
  return identify(a, tau, basis);
}

ConsistencyReport consistency(const std::vector<DriveParams>& sets) {
  if (sets.size() < 2) throw ValidationError("consistency: need at least two parameter sets");
  ConsistencyReport rep;
  rep.basis = sets.front().basis;
  for (const auto& p : sets) {
    if (p.basis != rep.basis) throw ValidationError("consistency: parameter sets use different bases");
    if (p.values.size() != static_cast<long>(rep.basis.size())) {
      throw ValidationError("consistency: parameter vector does not match its basis");
    }
  }
  const double count = static_cast<double>(sets.size());
  for (std::size_t k = 0; k < rep.basis.size(); ++k) {
    ParameterStats st;
    for (const auto& p : sets) st.avg += p.values[static_cast<long>(k)];
    st.avg /= count;
    double ss = 0.0;
    for (const auto& p : sets) ss += std::pow(p.values[static_cast<long>(k)] - st.avg, 2);
    st.stdv = std::sqrt(ss / count);
    if (st.avg != 0.0) st.cm_percent = 100.0 * st.stdv / st.avg;
    rep.stats.push_back(st);
  }
  return rep;
}

double predict_drive_torque(const DriveParams& params, double theta_dd, double theta_d) {
  double tau = 0.0;
  for (std::size_t i = 0; i < params.basis.size(); ++i) {
    tau += params.values[static_cast<long>(i)] * regressor_entry(params.basis[i], theta_dd, theta_d);
  }
  return tau;
}

std::vector<VecX> add_drive_torques(const std::vector<double>& t, const std::vector<VecX>& tau,
                                    const std::vector<VecX>& qd, const std::vector<std::optional<DriveParams>>& drives) {
  const std::size_t n = t.size();
  if (tau.size() != n || qd.size() != n) throw ValidationError("add_drive_torques: series lengths differ");
  if (n < 3) throw ValidationError("add_drive_torques: need at least 3 samples");
  std::vector<VecX> out = tau;
  for (std::size_t j = 0; j < drives.size(); ++j) {
    if (!drives[j]) continue;
    const auto col = static_cast<long>(j);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (qd[i].size() <= col || tau[i].size() <= col) throw ValidationError("add_drive_torques: joint index out of range");
      v[i] = qd[i][col];
    }
    const auto a = differentiate(t, v);
    for (std::size_t i = 0; i < n; ++i) out[i][col] += predict_drive_torque(*drives[j], a[i], v[i]);
  }
  return out;
}

RawLog read_log(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  const int ct = table.column("t");
  const int cth = table.column("theta");
  const auto has = [&](const char* name) {
    return std::find(table.header.begin(), table.header.end(), name) != table.header.end();
  };
  const bool current = has("current");
  if (!current && !has("tau")) throw DataError(path.string() + ": needs a 'current' or 'tau' column");
  const int cl = table.column(current ? "current" : "tau");
  RawLog log;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    log.t.push_back(table.number(r, ct));
    log.theta.push_back(table.number(r, cth));
    (current ? log.current : log.tau).push_back(table.number(r, cl));
  }
  return log;
}

DriveMeta read_meta(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  DriveMeta m;
  try {
    m.joint = j.value("joint", std::string());
    m.pulley_ratio = j.at("pulley_ratio").get<double>();
    m.harmonic_ratio = j.at("harmonic_ratio").get<double>();
    m.motor_constant = j.at("motor_constant").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return m;
}

}  // namespace contactdyn::ident
