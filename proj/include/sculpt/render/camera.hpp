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

#include <cmath>
#include <optional>

#include "sculpt/core/error.hpp"
#include "sculpt/core/rng.hpp"
#include "sculpt/core/types.hpp"

namespace sculpt {

/// Perspective camera on a look-at sphere. Right-handed, y-up; azimuth 0
/// places the camera on the +z axis of the head frame (the reference-view
/// convention), azimuth 90 on +x. The camera looks down -z in eye space and
/// eye depth is reported positive.
struct Camera {
  Scalar azimuth_deg = 0.0;
  Scalar elevation_deg = 0.0;
  Scalar distance = 3.0;
  Scalar fovy_deg = 40.0;
  Vec3 look_at = Vec3::Zero();
  int width = 512;
  int height = 512;

  Vec3 position() const {
    const Scalar az = deg_to_rad(azimuth_deg);
    const Scalar el = deg_to_rad(elevation_deg);
    return look_at + distance * Vec3(std::cos(el) * std::sin(az),
                                     std::sin(el),
                                     std::cos(el) * std::cos(az));
  }

  Vec3 forward() const { return (look_at - position()).normalized(); }

  /// Rotation part of the view matrix (world directions to eye space).
  Mat3 view_rotation() const {
    const Vec3 f = forward();
    Vec3 up = Vec3::UnitY();
    if (std::abs(f.dot(up)) > 1.0 - 1e-9) up = Vec3::UnitZ();
    const Vec3 r = f.cross(up).normalized();
    const Vec3 u = r.cross(f);
    Mat3 rot;
    rot.row(0) = r;
    rot.row(1) = u;
    rot.row(2) = -f;
    return rot;
  }

  Vec3 to_eye(const Vec3& world) const {
    return view_rotation() * (world - position());
  }

  /// Positive distance along the viewing direction.
  Scalar eye_depth(const Vec3& world) const { return -to_eye(world).z(); }

  Scalar aspect() const {
    return static_cast<Scalar>(width) / static_cast<Scalar>(height);
  }

  /// cot(fovy/2); the vertical perspective scale.
  Scalar focal() const { return 1.0 / std::tan(0.5 * deg_to_rad(fovy_deg)); }

  /// Projects to continuous pixel coordinates with origin at the top-left
  /// corner and pixel centers at half-integers. Returns nothing for points
  /// at or behind the near plane.
  std::optional<Vec2> project(const Vec3& world, Scalar* depth = nullptr,
                              Scalar near = 1e-6) const {
    const Vec3 eye = to_eye(world);
    const Scalar w = -eye.z();
    if (w <= near) return std::nullopt;
    if (depth) *depth = w;
    const Scalar ndc_x = focal() / aspect() * eye.x() / w;
    const Scalar ndc_y = focal() * eye.y() / w;
    return Vec2(0.5 * (ndc_x + 1.0) * width, 0.5 * (1.0 - ndc_y) * height);
  }

  /// d(pixel xy)/d(world position), treating the camera as fixed.
  Eigen::Matrix<Scalar, 2, 3> project_jacobian(const Vec3& world) const {
    const Mat3 rot = view_rotation();
    const Vec3 eye = rot * (world - position());
    const Scalar w = -eye.z();
    const Scalar sx = 0.5 * width * focal() / aspect();
    const Scalar sy = -0.5 * height * focal();
    // pixel.x = sx * x/w + width/2, w = -z
    Eigen::Matrix<Scalar, 2, 3> d_eye;
    d_eye << sx / w, 0.0, sx * eye.x() / (w * w), 0.0, sy / w,
        sy * eye.y() / (w * w);
    return d_eye * rot;
  }
};

inline Camera camera_from_spherical(Scalar azimuth_deg, Scalar elevation_deg,
                                    Scalar distance, Scalar fovy_deg,
                                    const Vec3& look_at, int width,
                                    int height) {
  if (!(fovy_deg > 0.0 && fovy_deg < 180.0))
    throw InvalidArgument("camera_from_spherical: fovy must be in (0, 180)");
  if (!(distance > 0.0))
    throw InvalidArgument("camera_from_spherical: distance must be positive");
  if (width <= 0 || height <= 0)
    throw InvalidArgument("camera_from_spherical: image size must be positive");
  Camera cam;
  cam.azimuth_deg = azimuth_deg;
  cam.elevation_deg = elevation_deg;
  cam.distance = distance;
  cam.fovy_deg = fovy_deg;
  cam.look_at = look_at;
  cam.width = width;
  cam.height = height;
  return cam;
}

/// Per-component [min, max] sampling ranges for random view selection.
struct CameraRanges {
  Vec2 elevation_deg{-20.0, 45.0};
  Vec2 azimuth_deg{-180.0, 180.0};
  Vec2 fovy_deg{30.0, 45.0};
  Vec2 distance{2.5, 4.0};

  void validate() const {
    const auto check = [](const Vec2& r, const char* name) {
      if (r[0] > r[1])
        throw InvalidArgument(std::string("CameraRanges: min > max for ") +
                              name);
    };
    check(elevation_deg, "elevation");
    check(azimuth_deg, "azimuth");
    check(fovy_deg, "fovy");
    check(distance, "distance");
  }
};

/// Uniform sample per component. Draw order is azimuth, elevation, fovy,
/// distance, so the rng advances the same way for every caller.
inline Camera sample_camera(const CameraRanges& ranges, Rng& rng,
                            const Vec3& look_at = Vec3::Zero(),
                            int width = 512, int height = 512) {
  ranges.validate();
  const Scalar az = rng.uniform(ranges.azimuth_deg[0], ranges.azimuth_deg[1]);
  const Scalar el =
      rng.uniform(ranges.elevation_deg[0], ranges.elevation_deg[1]);
  const Scalar fovy = rng.uniform(ranges.fovy_deg[0], ranges.fovy_deg[1]);
  const Scalar dist = rng.uniform(ranges.distance[0], ranges.distance[1]);
  return camera_from_spherical(az, el, dist, fovy, look_at, width, height);
}

}  // namespace sculpt
