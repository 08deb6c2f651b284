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

#include <algorithm>
#include <cmath>

#include "sculpt/core/image.hpp"
#include "sculpt/render/camera.hpp"
#include "sculpt/tetra/landmarks.hpp"

namespace sculpt {

/// Renders landmarks as anti-aliased white disks on black, single channel.
/// Landmarks behind the camera are skipped; with a depth buffer supplied,
/// landmarks behind the rendered surface are occluded.
inline RasterImage project_landmarks(const LandmarkSet& landmarks,
                                     const Camera& camera,
                                     Scalar radius_px = 3.0,
                                     const RasterImage* depth_buffer = nullptr,
                                     Scalar depth_eps = 1e-2) {
  RasterImage img(camera.width, camera.height, 1, 0.0);
  for (const Vec3& lm : landmarks.points) {
    Scalar depth = 0.0;
    const auto center = camera.project(lm, &depth);
    if (!center) continue;

    if (depth_buffer) {
      const int cx = std::clamp(static_cast<int>(center->x()), 0,
                                camera.width - 1);
      const int cy = std::clamp(static_cast<int>(center->y()), 0,
                                camera.height - 1);
      const Scalar zbuf = depth_buffer->at(cx, cy);
      if (zbuf > 0.0 && depth > zbuf * (1.0 + depth_eps)) continue;
    }

    const int x0 = std::max(0, static_cast<int>(center->x() - radius_px - 1));
    const int x1 = std::min(camera.width - 1,
                            static_cast<int>(center->x() + radius_px + 1));
    const int y0 = std::max(0, static_cast<int>(center->y() - radius_px - 1));
    const int y1 = std::min(camera.height - 1,
                            static_cast<int>(center->y() + radius_px + 1));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const Scalar d = (Vec2(x + 0.5, y + 0.5) - *center).norm();
        const Scalar coverage = std::clamp(radius_px + 0.5 - d, 0.0, 1.0);
        img.at(x, y) = std::max(img.at(x, y), coverage);
      }
    }
  }
  return img;
}

}  // namespace sculpt
