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
#include <map>
#include <utility>
#include <vector>

#include "sculpt/render/raster.hpp"

namespace sculpt {

/// Soft coverage image with the data needed to push pixel gradients back to
/// vertex positions: per pixel the nearest silhouette edge, the clamped
/// closest-point parameter, and the unit vector from that point to the pixel.
struct SoftSilhouette {
  RasterImage image;  // sigmoid(sharpness * signed distance)
  Scalar sharpness = 0.0;

  struct PixelEdge {
    Index va = -1;   // mesh vertex ids of the nearest silhouette edge
    Index vb = -1;
    Scalar s = 0.0;  // closest-point parameter on the segment
    Vec2 dir = Vec2::Zero();  // (pixel - closest) / distance
    Scalar sign = 0.0;        // +1 covered, -1 background
  };
  std::vector<PixelEdge> nearest;
};

namespace detail {

/// Silhouette edges in screen space: mesh edges whose two incident faces
/// project with opposite orientation, plus boundary edges and edges whose
/// neighbour could not be projected.
inline std::vector<std::pair<Index, Index>> silhouette_edges(
    const TriMesh& mesh, const std::vector<ProjectedTriangle>& projected) {
  std::map<std::pair<Index, Index>, std::vector<Index>> edge_faces;
  for (Index f = 0; f < static_cast<Index>(mesh.faces.size()); ++f) {
    const auto& tri = mesh.faces[f];
    for (int k = 0; k < 3; ++k)
      edge_faces[std::minmax(tri[k], tri[(k + 1) % 3])].push_back(f);
  }
  std::vector<std::pair<Index, Index>> edges;
  for (const auto& [edge, faces] : edge_faces) {
    bool silhouette = false;
    if (faces.size() == 1) {
      silhouette = projected[faces[0]].valid;
    } else if (faces.size() == 2) {
      const auto& a = projected[faces[0]];
      const auto& b = projected[faces[1]];
      if (a.valid != b.valid)
        silhouette = true;
      else if (a.valid && b.valid && a.sign != b.sign)
        silhouette = true;
    }
    if (silhouette) edges.push_back(edge);
  }
  return edges;
}

}  // namespace detail

/// Per-pixel sigmoid of the signed screen-space distance (in pixels) to the
/// nearest silhouette edge; positive inside coverage. Exactly 0.5 on edges
/// and converging pointwise to the hard mask as sharpness grows.
inline SoftSilhouette soft_silhouette(const TriMesh& mesh,
                                      const Camera& camera, Scalar sharpness,
                                      const GBuffer* gbuffer = nullptr) {
  if (!(sharpness > 0.0))
    throw InvalidArgument("soft_silhouette: sharpness must be positive");

  GBuffer local;
  if (!gbuffer) {
    local = rasterize(mesh, camera);
    gbuffer = &local;
  }

  std::vector<detail::ProjectedTriangle> projected(mesh.faces.size());
  for (Index f = 0; f < static_cast<Index>(mesh.faces.size()); ++f)
    projected[f] = detail::project_triangle(mesh, camera, mesh.faces[f]);
  const auto edges = detail::silhouette_edges(mesh, projected);

  struct ScreenEdge {
    Vec2 a, b;
    Index va, vb;
  };
  std::vector<ScreenEdge> screen;
  screen.reserve(edges.size());
  for (const auto& [va, vb] : edges) {
    const auto pa = camera.project(mesh.positions[va]);
    const auto pb = camera.project(mesh.positions[vb]);
    if (!pa || !pb) continue;
    screen.push_back({*pa, *pb, va, vb});
  }

  SoftSilhouette out;
  out.sharpness = sharpness;
  out.image = RasterImage(camera.width, camera.height, 1, 0.0);
  out.nearest.assign(
      static_cast<std::size_t>(camera.width) * camera.height, {});

  if (screen.empty()) {
    // No silhouette: field is uniform; emit the hard mask.
    for (int y = 0; y < camera.height; ++y)
      for (int x = 0; x < camera.width; ++x)
        out.image.at(x, y) = gbuffer->covered(x, y) ? 1.0 : 0.0;
    return out;
  }

  parallel_rows(camera.height, [&](int y0, int y1) {
    for (int y = y0; y < y1; ++y) {
      for (int x = 0; x < camera.width; ++x) {
        const Vec2 q(x + 0.5, y + 0.5);
        Scalar best_sq = std::numeric_limits<Scalar>::max();
        SoftSilhouette::PixelEdge best;
        for (const ScreenEdge& e : screen) {
          const Vec2 ab = e.b - e.a;
          const Scalar len_sq = ab.squaredNorm();
          Scalar s = len_sq > 0.0 ? (q - e.a).dot(ab) / len_sq : 0.0;
          s = std::clamp(s, 0.0, 1.0);
          const Vec2 closest = e.a + s * ab;
          const Scalar d_sq = (q - closest).squaredNorm();
          if (d_sq < best_sq) {
            best_sq = d_sq;
            best.va = e.va;
            best.vb = e.vb;
            best.s = s;
            best.dir = d_sq > 0.0 ? Vec2((q - closest) / std::sqrt(d_sq))
                                  : Vec2::Zero();
          }
        }
        best.sign = gbuffer->covered(x, y) ? 1.0 : -1.0;
        const Scalar sd = best.sign * std::sqrt(best_sq);
        out.image.at(x, y) = 1.0 / (1.0 + std::exp(-sharpness * sd));
        out.nearest[out.image.width * y + x] = best;
      }
    }
  });
  return out;
}

/// Backward: pixel gradients flow to the two endpoints of each pixel's
/// nearest silhouette edge, through the screen projection, with the
/// edge assignment and the inside/outside sign treated as fixed.
inline void soft_silhouette_backward(const SoftSilhouette& soft,
                                     const TriMesh& mesh,
                                     const Camera& camera,
                                     const RasterImage& grad_image,
                                     std::vector<Vec3>& grad_positions) {
  if (!soft.image.same_shape(grad_image))
    throw InvalidArgument("soft_silhouette_backward: shape mismatch");
  if (grad_positions.size() != mesh.positions.size())
    grad_positions.resize(mesh.positions.size(), Vec3::Zero());

  // Accumulate 2D gradients per vertex first, then chain through projection.
  std::vector<Vec2> grad_screen(mesh.positions.size(), Vec2::Zero());
  for (int y = 0; y < soft.image.height; ++y) {
    for (int x = 0; x < soft.image.width; ++x) {
      const Scalar g = grad_image.at(x, y);
      if (g == 0.0) continue;
      const auto& px = soft.nearest[soft.image.width * y + x];
      if (px.va < 0) continue;
      const Scalar v = soft.image.at(x, y);
      const Scalar dsig = v * (1.0 - v) * soft.sharpness;
      if (dsig == 0.0) continue;
      // d(distance)/d(closest point) = -dir; closest = (1-s) a + s b.
      const Vec2 d_dist_da = -(1.0 - px.s) * px.dir;
      const Vec2 d_dist_db = -px.s * px.dir;
      const Scalar k = g * dsig * px.sign;
      grad_screen[px.va] += k * d_dist_da;
      grad_screen[px.vb] += k * d_dist_db;
    }
  }
  for (std::size_t v = 0; v < mesh.positions.size(); ++v) {
    if (grad_screen[v] == Vec2::Zero()) continue;
    if (!camera.project(mesh.positions[v])) continue;
    grad_positions[v] +=
        camera.project_jacobian(mesh.positions[v]).transpose() *
        grad_screen[v];
  }
}

}  // namespace sculpt
