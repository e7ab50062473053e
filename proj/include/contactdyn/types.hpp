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

#ifndef CONTACTDYN_TYPES_HPP_
#define CONTACTDYN_TYPES_HPP_

#include <Eigen/Dense>

namespace contactdyn {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

// Rigid transform: x_parent = rotation * x_child + translation.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Pose operator*(const Pose& rhs) const {
    return {rotation * rhs.rotation, rotation * rhs.translation + translation};
  }
  static Pose from_xyz_rpy(const Vec3& xyz, const Vec3& rpy);
};

inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

// R = Rz(yaw) * Ry(pitch) * Rx(roll).
Mat3 rotation_zyx(double yaw, double pitch, double roll);

}  // namespace contactdyn

#endif  // CONTACTDYN_TYPES_HPP_
