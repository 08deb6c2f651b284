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
#include <array>
#include <cmath>
#include <vector>

#include "sculpt/core/image.hpp"
#include "sculpt/core/parallel.hpp"
#include "sculpt/render/camera.hpp"
#include "sculpt/tetra/mesh.hpp"

namespace sculpt {

/// Per-pixel rasterization record. bary holds perspective-corrected weights
/// that sum to 1 on covered pixels; face is -1 on background. normal and uv
/// are cached interpolations of the rasterized mesh; the shade_* functions
/// re-derive attributes from (face, bary) so frozen-assignment re-shading of
/// a deformed mesh shares the same code path.
struct GBuffer {
  int width = 0;
  int height = 0;
  std::vector<Index> face;
  std::vector<Vec3> bary;
  std::vector<Scalar> depth;
  std::vector<Vec3> normal;
  std::vector<Vec2> uv;

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width + x;
  }
  bool covered(int x, int y) const { return face[index(x, y)] >= 0; }
};

namespace detail {

struct ProjectedTriangle {
  Vec2 p[3];      // pixel coordinates
  Scalar d[3];    // eye depths
  Scalar sign;    // orientation of the screen-space triangle
  bool valid = false;
};

inline ProjectedTriangle project_triangle(const TriMesh& mesh,
                                          const Camera& camera,
                                          const std::array<Index, 3>& tri) {
  ProjectedTriangle out;
  for (int k = 0; k < 3; ++k) {
    const auto px = camera.project(mesh.positions[tri[k]], &out.d[k]);
    if (!px) return out;  // behind the near plane; triangle is skipped
    out.p[k] = *px;
  }
  const Scalar area2 =
      (out.p[1] - out.p[0]).x() * (out.p[2] - out.p[0]).y() -
      (out.p[1] - out.p[0]).y() * (out.p[2] - out.p[0]).x();
  if (std::abs(area2) < 1e-14) return out;
  out.sign = area2 > 0.0 ? 1.0 : -1.0;
  out.valid = true;
  return out;
}

inline Scalar edge_function(const Vec2& a, const Vec2& b, const Vec2& p) {
  return (b - a).x() * (p - a).y() - (b - a).y() * (p - a).x();
}

/// Screen barycentrics at pixel point q, then perspective correction
/// lambda_i / d_i. Returns false when q is outside the triangle (inclusive
/// edges).
inline bool perspective_barycentrics(const ProjectedTriangle& t,
                                     const Vec2& q, Vec3& bary,
                                     Scalar& depth) {
  const Scalar w0 = edge_function(t.p[1], t.p[2], q) * t.sign;
  const Scalar w1 = edge_function(t.p[2], t.p[0], q) * t.sign;
  const Scalar w2 = edge_function(t.p[0], t.p[1], q) * t.sign;
  if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) return false;
  const Scalar wsum = w0 + w1 + w2;
  if (wsum <= 0.0) return false;
  const Vec3 lambda(w0 / wsum, w1 / wsum, w2 / wsum);
  const Vec3 over_d(lambda[0] / t.d[0], lambda[1] / t.d[1],
                    lambda[2] / t.d[2]);
  const Scalar inv = over_d.sum();
  bary = over_d / inv;
  depth = 1.0 / inv;
  return true;
}

}  // namespace detail

/// Deterministic z-buffer rasterization: nearest eye depth wins, ties go to
/// the lower face id. No near-plane clipping; triangles with a vertex at or
/// behind the camera are skipped.
inline GBuffer rasterize(const TriMesh& mesh, const Camera& camera) {
  GBuffer gbuf;
  gbuf.width = camera.width;
  gbuf.height = camera.height;
  const std::size_t n = static_cast<std::size_t>(gbuf.width) * gbuf.height;
  gbuf.face.assign(n, -1);
  gbuf.bary.assign(n, Vec3::Zero());
  gbuf.depth.assign(n, 0.0);
  gbuf.normal.assign(n, Vec3::Zero());
  gbuf.uv.assign(n, Vec2::Zero());

  std::vector<detail::ProjectedTriangle> projected(mesh.faces.size());
  for (Index f = 0; f < static_cast<Index>(mesh.faces.size()); ++f)
    projected[f] = detail::project_triangle(mesh, camera, mesh.faces[f]);

  parallel_rows(gbuf.height, [&](int y0, int y1) {
    for (Index f = 0; f < static_cast<Index>(mesh.faces.size()); ++f) {
      const auto& t = projected[f];
      if (!t.valid) continue;
      const Scalar min_x = std::min({t.p[0].x(), t.p[1].x(), t.p[2].x()});
      const Scalar max_x = std::max({t.p[0].x(), t.p[1].x(), t.p[2].x()});
      const Scalar min_y = std::min({t.p[0].y(), t.p[1].y(), t.p[2].y()});
      const Scalar max_y = std::max({t.p[0].y(), t.p[1].y(), t.p[2].y()});
      const int x0 = std::max(0, static_cast<int>(std::floor(min_x)) - 1);
      const int x1 =
          std::min(gbuf.width - 1, static_cast<int>(std::ceil(max_x)) + 1);
      const int yy0 = std::max(y0, static_cast<int>(std::floor(min_y)) - 1);
      const int yy1 = std::min(y1 - 1, static_cast<int>(std::ceil(max_y)) + 1);
      for (int y = yy0; y <= yy1; ++y) {
        for (int x = x0; x <= x1; ++x) {
          const Vec2 q(x + 0.5, y + 0.5);
          Vec3 bary;
          Scalar depth;
          if (!detail::perspective_barycentrics(t, q, bary, depth)) continue;
          const std::size_t i = gbuf.index(x, y);
          if (gbuf.face[i] >= 0 &&
              (gbuf.depth[i] < depth ||
               (gbuf.depth[i] == depth && gbuf.face[i] < f)))
            continue;
          gbuf.face[i] = f;
          gbuf.bary[i] = bary;
          gbuf.depth[i] = depth;
        }
      }
    }
  });

  // Cache interpolated attributes.
  const bool has_normals = mesh.has_normals();
  const bool has_uvs = mesh.has_uvs();
  parallel_rows(gbuf.height, [&](int y0, int y1) {
    for (int y = y0; y < y1; ++y) {
      for (int x = 0; x < gbuf.width; ++x) {
        const std::size_t i = gbuf.index(x, y);
        if (gbuf.face[i] < 0) continue;
        const auto& tri = mesh.faces[gbuf.face[i]];
        const Vec3& b = gbuf.bary[i];
        if (has_normals) {
          const Vec3 raw = b[0] * mesh.vertex_normals[tri[0]] +
                           b[1] * mesh.vertex_normals[tri[1]] +
                           b[2] * mesh.vertex_normals[tri[2]];
          const Scalar len = raw.norm();
          gbuf.normal[i] = len > 0.0 ? Vec3(raw / len) : Vec3::Zero();
        }
        if (has_uvs)
          gbuf.uv[i] = b[0] * mesh.uvs[tri[0]] + b[1] * mesh.uvs[tri[1]] +
                       b[2] * mesh.uvs[tri[2]];
      }
    }
  });
  return gbuf;
}

/// Hard coverage mask: 1 on covered pixels.
inline RasterImage shade_mask(const GBuffer& gbuf) {
  RasterImage img(gbuf.width, gbuf.height, 1, 0.0);
  for (int y = 0; y < gbuf.height; ++y)
    for (int x = 0; x < gbuf.width; ++x)
      if (gbuf.covered(x, y)) img.at(x, y) = 1.0;
  return img;
}

/// Eye-space depth; background 0. Attributes are re-derived from the frozen
/// (face, bary) assignment and the passed mesh, so the same call evaluates a
/// deformed mesh under a frozen assignment.
inline RasterImage shade_depth(const GBuffer& gbuf, const TriMesh& mesh,
                               const Camera& camera) {
  RasterImage img(gbuf.width, gbuf.height, 1, 0.0);
  const Vec3 fwd = camera.forward();
  const Vec3 pos = camera.position();
  for (int y = 0; y < gbuf.height; ++y)
    for (int x = 0; x < gbuf.width; ++x) {
      const std::size_t i = gbuf.index(x, y);
      if (gbuf.face[i] < 0) continue;
      const auto& tri = mesh.faces[gbuf.face[i]];
      const Vec3& b = gbuf.bary[i];
      Scalar depth = 0.0;
      for (int k = 0; k < 3; ++k)
        depth += b[k] * fwd.dot(mesh.positions[tri[k]] - pos);
      img.at(x, y) = depth;
    }
  return img;
}

/// Camera-space unit normals in [-1, 1] per channel; background 0.
inline RasterImage shade_normal(const GBuffer& gbuf, const TriMesh& mesh,
                                const Camera& camera) {
  if (!mesh.has_normals())
    throw InvalidArgument("shade_normal: mesh has no vertex normals");
  RasterImage img(gbuf.width, gbuf.height, 3, 0.0);
  const Mat3 rot = camera.view_rotation();
  for (int y = 0; y < gbuf.height; ++y)
    for (int x = 0; x < gbuf.width; ++x) {
      const std::size_t i = gbuf.index(x, y);
      if (gbuf.face[i] < 0) continue;
      const auto& tri = mesh.faces[gbuf.face[i]];
      const Vec3& b = gbuf.bary[i];
      const Vec3 raw = b[0] * mesh.vertex_normals[tri[0]] +
                       b[1] * mesh.vertex_normals[tri[1]] +
                       b[2] * mesh.vertex_normals[tri[2]];
      const Scalar len = raw.norm();
      if (len <= 0.0) continue;
      const Vec3 n = rot * (raw / len);
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = n[c];
    }
  return img;
}

/// Maps a [-1, 1] normal image into [0, 1]^3 for use as a conditioning or
/// guidance image; background maps to 0.5.
inline RasterImage normal_image_to_unit_range(const RasterImage& normals) {
  RasterImage out = normals;
  for (Scalar& v : out.data) v = 0.5 * (v + 1.0);
  return out;
}

/// Bilinear texture taps of one pixel; unused taps have weight 0.
struct TextureTap {
  int texel = 0;
  Scalar weight = 0.0;
};

struct TextureFootprint {
  int tex_size = 0;
  std::vector<std::array<TextureTap, 4>> taps;  // per pixel
  long clamped_uv_count = 0;                    // diagnostics
};

namespace detail {

/// Bilinear taps at uv with clamp-to-edge. Row 0 of the atlas image is
/// v = 1 (image rows run top-down).
inline std::array<TextureTap, 4> bilinear_taps(const Vec2& uv, int size,
                                               bool* clamped) {
  const Scalar fx = uv.x() * size - 0.5;
  const Scalar fy = (1.0 - uv.y()) * size - 0.5;
  if (clamped)
    *clamped = uv.x() < 0.0 || uv.x() > 1.0 || uv.y() < 0.0 || uv.y() > 1.0;
  const int x0 = static_cast<int>(std::floor(fx));
  const int y0 = static_cast<int>(std::floor(fy));
  const Scalar ax = fx - x0;
  const Scalar ay = fy - y0;
  const auto clamp_i = [size](int v) { return std::clamp(v, 0, size - 1); };
  const int xs[2] = {clamp_i(x0), clamp_i(x0 + 1)};
  const int ys[2] = {clamp_i(y0), clamp_i(y0 + 1)};
  const Scalar wx[2] = {1.0 - ax, ax};
  const Scalar wy[2] = {1.0 - ay, ay};
  std::array<TextureTap, 4> taps;
  int k = 0;
  for (int j = 0; j < 2; ++j)
    for (int i = 0; i < 2; ++i)
      taps[k++] = {ys[j] * size + xs[i], wx[i] * wy[j]};
  return taps;
}

}  // namespace detail

/// Bilinear texture shading; uv comes from the frozen assignment and the
/// passed mesh. Records the footprint for the backward pass. Pixels that are
/// uncovered in the g-buffer take the background value.
inline RasterImage shade_texture(const GBuffer& gbuf, const TriMesh& mesh,
                                 const RasterImage& texels,
                                 TextureFootprint* footprint = nullptr,
                                 Scalar background = 0.5) {
  if (!mesh.has_uvs())
    throw InvalidArgument("shade_texture: mesh has no uvs");
  if (texels.width != texels.height || texels.channels != 3)
    throw InvalidArgument("shade_texture: texels must be square RGB");
  RasterImage img(gbuf.width, gbuf.height, 3, background);
  if (footprint) {
    footprint->tex_size = texels.width;
    footprint->taps.assign(
        static_cast<std::size_t>(gbuf.width) * gbuf.height, {});
    footprint->clamped_uv_count = 0;
  }
  for (int y = 0; y < gbuf.height; ++y)
    for (int x = 0; x < gbuf.width; ++x) {
      const std::size_t i = gbuf.index(x, y);
      if (gbuf.face[i] < 0) continue;
      const auto& tri = mesh.faces[gbuf.face[i]];
      const Vec3& b = gbuf.bary[i];
      const Vec2 uv = b[0] * mesh.uvs[tri[0]] + b[1] * mesh.uvs[tri[1]] +
                      b[2] * mesh.uvs[tri[2]];
      bool clamped = false;
      const auto taps = detail::bilinear_taps(uv, texels.width, &clamped);
      for (int c = 0; c < 3; ++c) {
        Scalar v = 0.0;
        for (const auto& tap : taps) v += tap.weight * texels.data[static_cast<std::size_t>(tap.texel) * 3 + c];
        img.at(x, y, c) = v;
      }
      if (footprint) {
        footprint->taps[i] = taps;
        if (clamped) ++footprint->clamped_uv_count;
      }
    }
  return img;
}

}  // namespace sculpt
