// Copyright 2026 The sculpt authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <limits>
#include <vector>

namespace sculpt {

using Scalar = double;
using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Index = std::int32_t;

inline constexpr Scalar kPi = 3.14159265358979323846;

inline Scalar deg_to_rad(Scalar deg) { return deg * kPi / 180.0; }
inline Scalar rad_to_deg(Scalar rad) { return rad * 180.0 / kPi; }

/// Axis-aligned box in world units.
struct Box3 {
  Vec3 min = Vec3::Constant(std::numeric_limits<Scalar>::max());
  Vec3 max = Vec3::Constant(std::numeric_limits<Scalar>::lowest());

  Vec3 extent() const { return max - min; }
  Vec3 center() const { return 0.5 * (min + max); }
  bool valid() const {
    return min.x() <= max.x() && min.y() <= max.y() && min.z() <= max.z();
  }
  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
  void expand(const Vec3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }
  void expand(const Box3& b) {
    min = min.cwiseMin(b.min);
    max = max.cwiseMax(b.max);
  }
  Box3 inflated(Scalar amount) const {
    return Box3{min - Vec3::Constant(amount), max + Vec3::Constant(amount)};
  }
  Scalar squared_distance(const Vec3& p) const {
    const Vec3 d = (min - p).cwiseMax(Vec3::Zero()).cwiseMax(p - max);
    return d.squaredNorm();
  }
};

}  // namespace sculpt
