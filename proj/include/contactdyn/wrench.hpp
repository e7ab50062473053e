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

#ifndef CONTACTDYN_WRENCH_HPP_
#define CONTACTDYN_WRENCH_HPP_

#include "contactdyn/types.hpp"

namespace contactdyn {

// Force and moment acting on the robot at `point`, all in world coordinates.
struct ContactWrench {
  Vec3 force = Vec3::Zero();
  Vec3 moment = Vec3::Zero();
  Vec3 point = Vec3::Zero();

  Vec6 stacked() const {
    Vec6 w;
    w << force, moment;
    return w;
  }
  // Same wrench expressed about another point.
  Vec3 moment_about(const Vec3& p) const { return moment + (point - p).cross(force); }
};

}  // namespace contactdyn

#endif  // CONTACTDYN_WRENCH_HPP_
