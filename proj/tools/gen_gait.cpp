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

// Regenerates the bundled reference trajectories under data/gaits.

#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "contactdyn/gait.hpp"
#include "contactdyn/model_io.hpp"

int main(int argc, char** argv) {
  using namespace contactdyn;
  CLI::App app{"Generate reference gaits for the surena-lower model"};
  std::filesystem::path out_dir = std::filesystem::path(CONTACTDYN_DEFAULT_DATA_DIR) / "gaits";
  gait::WalkPattern pattern;
  app.add_option("--out-dir", out_dir, "Output directory");
  app.add_option("--speed", pattern.speed_kmh, "Walking speed in km/h");
  app.add_option("--steps", pattern.steps, "Number of steps");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto tree = kinetree::build_tree(model_io::preset("surena-lower"));
    std::filesystem::create_directories(out_dir);
    const auto walk = gait::generate_walk(tree, pattern);
    gait::write_csv(out_dir / "gait_0p5kmh.csv", walk);
    gait::write_csv(out_dir / "static_stand.csv", gait::generate_stand(tree));
    std::cout << "wrote " << walk.samples.size() << " walk samples to " << out_dir.string() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
