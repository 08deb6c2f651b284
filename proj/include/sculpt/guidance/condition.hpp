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

#include <cstring>

#include "sculpt/guidance/canny.hpp"
#include "sculpt/guidance/provider.hpp"
#include "sculpt/render/landmark_image.hpp"
#include "sculpt/render/raster.hpp"

namespace sculpt {

struct ConditionSettings {
  Scalar canny_low = 0.05;
  Scalar canny_high = 0.15;
  Scalar landmark_radius_px = 3.0;
};

/// Assembles the guidance conditions for one camera: the Canny image of the
/// reference, the projected landmark image (occlusion-tested against the
/// mesh when one is supplied), and the opaque identity vector and text tag.
/// A missing landmark set leaves landmark_image unset, which marks the
/// bundle as landmark-free.
inline ConditionBundle build_condition_bundle(
    const RasterImage* reference_image, std::vector<Scalar> identity,
    const LandmarkSet* landmarks, const Camera& camera, const TriMesh* mesh,
    std::string text_tag, const ConditionSettings& settings = {}) {
  ConditionBundle bundle;
  bundle.text_tag = std::move(text_tag);
  bundle.identity = std::move(identity);

  if (reference_image && !reference_image->empty())
    bundle.canny_image =
        canny(*reference_image, settings.canny_low, settings.canny_high);

  if (landmarks && !landmarks->points.empty()) {
    if (mesh && !mesh->empty()) {
      const GBuffer gbuf = rasterize(*mesh, camera);
      const RasterImage depth = shade_depth(gbuf, *mesh, camera);
      bundle.landmark_image = project_landmarks(
          *landmarks, camera, settings.landmark_radius_px, &depth);
    } else {
      bundle.landmark_image =
          project_landmarks(*landmarks, camera, settings.landmark_radius_px);
    }
  }
  return bundle;
}

/// Deterministic identity embedding derived from an image, for tests and
/// fixtures where no embedding file is supplied. Seeded hash of the pixel
/// data; unit norm.
inline std::vector<Scalar> derive_identity(const RasterImage& image, int dim,
                                           std::uint64_t seed) {
  std::uint64_t state = seed ^ 0x9e3779b97f4a7c15ULL;
  for (Scalar v : image.data) {
    std::uint64_t bits = 0;
    const float f = static_cast<float>(v);
    std::memcpy(&bits, &f, sizeof(float));
    state = detail::splitmix64(state) ^ bits;
  }
  Rng rng(detail::splitmix64(state));
  std::vector<Scalar> identity(dim);
  Scalar norm_sq = 0.0;
  for (Scalar& v : identity) {
    v = rng.normal();
    norm_sq += v * v;
  }
  const Scalar norm = std::sqrt(norm_sq);
  if (norm > 0.0)
    for (Scalar& v : identity) v /= norm;
  return identity;
}

}  // namespace sculpt
