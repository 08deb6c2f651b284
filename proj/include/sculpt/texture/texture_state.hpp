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

#include <deque>

#include "sculpt/guidance/oracle.hpp"
#include "sculpt/render/raster.hpp"
#include "sculpt/texture/atlas.hpp"

namespace sculpt {

/// UV texel colors plus the coverage mask of colored (baked) texels.
/// Coverage only ever grows across inpainting steps.
struct TextureState {
  RasterImage texels;    // W x W RGB, linear
  RasterImage coverage;  // W x W in {0, 1}
  long generation = 0;

  static TextureState create(int size, Scalar fill = kGuidanceBackground) {
    TextureState state;
    state.texels = RasterImage(size, size, 3, fill);
    state.coverage = RasterImage(size, size, 1, 0.0);
    return state;
  }

  int size() const { return texels.width; }

  std::size_t covered_count() const {
    std::size_t n = 0;
    for (Scalar v : coverage.data)
      if (v > 0.5) ++n;
    return n;
  }
};

struct BakeSettings {
  Scalar grazing_angle_deg = 75.0;
  Scalar depth_eps = 0.02;  // relative occlusion tolerance
};

/// Back-projects an image onto the texture: every uncovered occupied texel
/// whose surface point is visible from the camera (depth-buffer test within
/// a relative epsilon) and not seen at a grazing angle takes the bilinearly
/// sampled image color. Covered texels are never overwritten, so earlier
/// views win under the trajectory order.
inline TextureState bake_view(TextureState state, const RasterImage& image,
                              const Camera& camera, const TriMesh& mesh,
                              const TexelTable& table,
                              const BakeSettings& settings = {}) {
  if (image.width != camera.width || image.height != camera.height)
    throw InvalidArgument("bake_view: image resolution must match the camera");
  if (state.size() != table.size)
    throw InvalidArgument("bake_view: texel table size mismatch");

  const GBuffer gbuf = rasterize(mesh, camera);
  const RasterImage zbuf = shade_depth(gbuf, mesh, camera);
  const Scalar cos_graze = std::cos(deg_to_rad(settings.grazing_angle_deg));
  const Vec3 cam_pos = camera.position();

  const int n = state.size();
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * n + x;
      if (table.face[i] < 0) continue;
      if (state.coverage.data[i] > 0.5) continue;

      const Vec3& pos = table.position[i];
      const Vec3 to_cam = (cam_pos - pos).normalized();
      if (table.normal[i].dot(to_cam) < cos_graze) continue;

      Scalar depth = 0.0;
      const auto px = camera.project(pos, &depth);
      if (!px) continue;
      const int ix = static_cast<int>(px->x());
      const int iy = static_cast<int>(px->y());
      if (ix < 0 || iy < 0 || ix >= camera.width || iy >= camera.height)
        continue;
      const Scalar zref = zbuf.at(ix, iy);
      if (zref <= 0.0) continue;  // silhouette gap
      if (depth > zref * (1.0 + settings.depth_eps)) continue;

      // Bilinear sample of the source image at the projected position.
      const Scalar fx = px->x() - 0.5;
      const Scalar fy = px->y() - 0.5;
      const int bx = static_cast<int>(std::floor(fx));
      const int by = static_cast<int>(std::floor(fy));
      const Scalar ax = fx - bx;
      const Scalar ay = fy - by;
      const auto cl = [&](int v, int hi) { return std::clamp(v, 0, hi - 1); };
      for (int c = 0; c < 3; ++c) {
        const Scalar v00 = image.at(cl(bx, image.width), cl(by, image.height), c);
        const Scalar v10 =
            image.at(cl(bx + 1, image.width), cl(by, image.height), c);
        const Scalar v01 =
            image.at(cl(bx, image.width), cl(by + 1, image.height), c);
        const Scalar v11 =
            image.at(cl(bx + 1, image.width), cl(by + 1, image.height), c);
        state.texels.data[i * 3 + c] = (1 - ax) * (1 - ay) * v00 +
                                       ax * (1 - ay) * v10 +
                                       (1 - ax) * ay * v01 + ax * ay * v11;
      }
      state.coverage.data[i] = 1.0;
    }
  }
  ++state.generation;
  return state;
}

/// Renders the partially colored texture: a pixel is known iff it is
/// covered by the mesh and every occupied texel in its bilinear footprint
/// is colored. Unknown pixels take the guidance gray.
inline std::pair<RasterImage, RasterImage> render_partial(
    const TextureState& state, const Camera& camera, const TriMesh& mesh,
    const TexelTable& table, const GBuffer* gbuffer = nullptr,
    TextureFootprint* footprint_out = nullptr) {
  GBuffer local;
  if (!gbuffer) {
    local = rasterize(mesh, camera);
    gbuffer = &local;
  }
  TextureFootprint footprint;
  RasterImage image = shade_texture(*gbuffer, mesh, state.texels, &footprint,
                                    kGuidanceBackground);
  RasterImage known(camera.width, camera.height, 1, 0.0);
  for (int y = 0; y < camera.height; ++y) {
    for (int x = 0; x < camera.width; ++x) {
      const std::size_t i = gbuffer->index(x, y);
      if (gbuffer->face[i] < 0) continue;
      bool all_covered = true;
      bool any_occupied = false;
      for (const TextureTap& tap : footprint.taps[i]) {
        if (tap.weight <= 0.0) continue;
        if (table.face[tap.texel] < 0) continue;  // gutter taps do not count
        any_occupied = true;
        if (state.coverage.data[tap.texel] <= 0.5) all_covered = false;
      }
      if (any_occupied && all_covered) {
        known.at(x, y) = 1.0;
      } else {
        for (int c = 0; c < 3; ++c)
          image.at(x, y, c) = kGuidanceBackground;
      }
    }
  }
  if (footprint_out) *footprint_out = std::move(footprint);
  return {std::move(image), std::move(known)};
}

/// The texel update of progressive inpainting: covered texels keep their
/// colors bit-exactly, uncovered texels come bit-exactly from the freshly
/// baked candidate.
inline TextureState blend_texture(const TextureState& previous,
                                  const TextureState& candidate) {
  if (previous.size() != candidate.size())
    throw InvalidArgument("blend_texture: size mismatch");
  TextureState out = previous;
  const std::size_t n = previous.coverage.data.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (previous.coverage.data[i] > 0.5) continue;
    for (int c = 0; c < 3; ++c)
      out.texels.data[i * 3 + c] = candidate.texels.data[i * 3 + c];
    out.coverage.data[i] = candidate.coverage.data[i] > 0.5 ? 1.0 : 0.0;
  }
  out.generation = previous.generation + 1;
  return out;
}

}  // namespace sculpt
