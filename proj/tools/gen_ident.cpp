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

// Regenerates the bundled drive identification fixtures under data/ident:
// five noisy current logs of one drive with fixed parameters, their shared
// metadata, and the five-row parameter table used for consistency checks.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>

#include "CLI11.hpp"
#include "contactdyn/csv.hpp"
#include "json.hpp"

int main(int argc, char** argv) {
  namespace fs = std::filesystem;
  using contactdyn::csv::format;
  CLI::App app{"Generate drive identification fixtures"};
  fs::path out_dir = fs::path(CONTACTDYN_DEFAULT_DATA_DIR) / "ident";
  app.add_option("--out-dir", out_dir, "Output directory");
  CLI11_PARSE(app, argc, argv);

  constexpr double j = 8.14, b = 87.34, f = 24.83;  // joint-side inertia, viscous, Coulomb
  constexpr double pulley = 1.5, harmonic = 100.0, km = 0.0502;
  constexpr double rate = 500.0, duration = 4.0;
  constexpr double current_noise = 0.01;  // A
  constexpr double angle_noise = 2e-5;    // rad
  const double per_amp = pulley * harmonic * km;

  try {
    fs::create_directories(out_dir / "synthetic");
    std::ofstream meta(out_dir / "synthetic" / "drive.json");
    meta << nlohmann::json{{"format", 1},        {"joint", "r_knee"},         {"pulley_ratio", pulley},
                           {"harmonic_ratio", harmonic}, {"motor_constant", km}}
                .dump(2)
         << '\n';

    std::mt19937_64 rng(20260115);
    std::normal_distribution<double> unit(0.0, 1.0);
    for (int e = 1; e <= 5; ++e) {
      // Each experiment uses its own two-tone excitation.
      const double w1 = 2.0 * std::numbers::pi * (0.6 + 0.15 * e);
      const double w2 = 2.0 * std::numbers::pi * (1.7 + 0.2 * e);
      const double a1 = 0.4 + 0.03 * e, a2 = 0.15, phase = 0.3 * e;
      contactdyn::csv::Writer w(out_dir / "synthetic" / ("exp" + std::to_string(e) + ".csv"),
                                "units: t s, theta rad, current A", {"t", "theta", "current"});
      const int n = static_cast<int>(duration * rate) + 1;
      for (int i = 0; i < n; ++i) {
        const double t = i / rate;
        const double th = a1 * std::sin(w1 * t) + a2 * std::sin(w2 * t + phase);
        const double thd = a1 * w1 * std::cos(w1 * t) + a2 * w2 * std::cos(w2 * t + phase);
        const double thdd = -a1 * w1 * w1 * std::sin(w1 * t) - a2 * w2 * w2 * std::sin(w2 * t + phase);
        const double tau = j * thdd + b * thd + f * (thd > 0.0 ? 1.0 : (thd < 0.0 ? -1.0 : 0.0));
        w.row(std::vector<double>{t, th + angle_noise * unit(rng), tau / per_amp + current_noise * unit(rng)});
      }
    }

    // The five (j, b, f) rows of the published drive table.
    contactdyn::csv::Writer table(out_dir / "drive_table.csv", "units: j kg m^2, b N m s/rad, f N m",
                                  {"experiment", "j", "b", "f"});
    const double rows[5][3] = {{10.51, 116.48, 24.34},
                               {9.84, 105.00, 25.25},
                               {1.37, 88.11, 26.34},
                               {13.017, 58.32, 24.20},
                               {5.96, 68.77, 24.04}};
    for (int r = 0; r < 5; ++r) {
      table.row(std::vector<std::string>{std::to_string(r + 1), format(rows[r][0]), format(rows[r][1]),
                                         format(rows[r][2])});
    }
    std::cout << "wrote identification fixtures to " << out_dir.string() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
