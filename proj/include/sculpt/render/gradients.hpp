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

#include "sculpt/render/raster.hpp"
#include "sculpt/tetra/marching_tets.hpp"

namespace sculpt {

/// Fixed-assignment gradients collected from pixel losses.
struct RenderGrads {
  std::vector<Vec3> d_positions;
  std::vector<Vec3> d_normals;
  RasterImage d_texels;

  static RenderGrads zeros(const TriMesh& mesh, int tex_size = 0) {
    RenderGrads g;
    g.d_positions.assign(mesh.positions.size(), Vec3::Zero());
    g.d_normals.assign(mesh.positions.size(), Vec3::Zero());
    if (tex_size > 0) g.d_texels = RasterImage(tex_size, tex_size, 3, 0.0);
    return g;
  }
};

/// Backward of shade_normal: gradients on the camera-space normal image flow
/// to per-vertex world normals through the per-pixel normalization and the
/// frozen barycentric weights.
inline void shade_normal_backward(const GBuffer& gbuf, const TriMesh& mesh,
                                  const Camera& camera,
                                  const RasterImage& grad_image,
                                  std::vector<Vec3>& d_normals) {
  if (grad_image.width != gbuf.width || grad_image.height != gbuf.height ||
      grad_image.channels != 3)
    throw InvalidArgument("shade_normal_backward: shape mismatch");
  if (d_normals.size() != mesh.positions.size())
    d_normals.resize(mesh.positions.size(), Vec3::Zero());

  const Mat3 rot_t = camera.view_rotation().transpose();
  for (int y = 0; y < gbuf.height; ++y) {
    for (int x = 0; x < gbuf.width; ++x) {
      const std::size_t i = gbuf.index(x, y);
      if (gbuf.face[i] < 0) continue;
      const Vec3 g_cam(grad_image.at(x, y, 0), grad_image.at(x, y, 1),
                       grad_image.at(x, y, 2));
      if (g_cam == Vec3::Zero()) continue;
      const auto& tri = mesh.faces[gbuf.face[i]];
      const Vec3& b = gbuf.bary[i];
      const Vec3 raw = b[0] * mesh.vertex_normals[tri[0]] +
                       b[1] * mesh.vertex_normals[tri[1]] +
                       b[2] * mesh.vertex_normals[tri[2]];
      const Scalar len = raw.norm();
      if (len <= 0.0) continue;
      const Vec3 u = raw / len;
      const Vec3 g_world = rot_t * g_cam;
      const Vec3 g_raw = (g_world - u * u.dot(g_world)) / len;
      for (int k = 0; k < 3; ++k) d_normals[tri[k]] += b[k] * g_raw;
    }
  }
}

/// Backward of shade_depth: eye depth is linear in vertex positions along
/// the camera forward axis.
inline void shade_depth_backward(const GBuffer& gbuf, const TriMesh& mesh,
                                 const Camera& camera,
                                 const RasterImage& grad_image,
                                 std::vector<Vec3>& d_positions) {
  if (grad_image.width != gbuf.width || grad_image.height != gbuf.height ||
      grad_image.channels != 1)
    throw InvalidArgument("shade_depth_backward: shape mismatch");
  if (d_positions.size() != mesh.positions.size())
    d_positions.resize(mesh.positions.size(), Vec3::Zero());

  const Vec3 fwd = camera.forward();
  for (int y = 0; y < gbuf.height; ++y) {
    for (int x = 0; x < gbuf.width; ++x) {
      const std::size_t i = gbuf.index(x, y);
      if (gbuf.face[i] < 0) continue;
      const Scalar g = grad_image.at(x, y);
      if (g == 0.0) continue;
      const auto& tri = mesh.faces[gbuf.face[i]];
      const Vec3& b = gbuf.bary[i];
      for (int k = 0; k < 3; ++k) d_positions[tri[k]] += g * b[k] * fwd;
    }
  }
}

/// Backward of shade_texture: image gradients land on the at-most-four
/// texels in each pixel's bilinear footprint.
inline void shade_texture_backward(const GBuffer& gbuf,
                                   const TextureFootprint& footprint,
                                   const RasterImage& grad_image,
                                   RasterImage& d_texels) {
  if (grad_image.width != gbuf.width || grad_image.height != gbuf.height ||
      grad_image.channels != 3)
    throw InvalidArgument("shade_texture_backward: shape mismatch");
  if (d_texels.width != footprint.tex_size ||
      d_texels.height != footprint.tex_size || d_texels.channels != 3)
    throw InvalidArgument("shade_texture_backward: texel gradient shape");

  for (int y = 0; y < gbuf.height; ++y) {
    for (int x = 0; x < gbuf.width; ++x) {
      const std::size_t i = gbuf.index(x, y);
      if (gbuf.face[i] < 0) continue;
      for (const TextureTap& tap : footprint.taps[i]) {
        if (tap.weight == 0.0) continue;
        for (int c = 0; c < 3; ++c)
          d_texels.data[static_cast<std::size_t>(tap.texel) * 3 + c] +=
              tap.weight * grad_image.at(x, y, c);
      }
    }
  }
}

/// Pixel-loss gradients per shaded image; null entries are absent.
struct PixelGrads {
  const RasterImage* normal_image = nullptr;   // 3 channels
  const RasterImage* depth_image = nullptr;    // 1 channel
  const RasterImage* texture_image = nullptr;  // 3 channels
};

/// Umbrella backward from pixel losses to scene parameters under the fixed
/// pixel-to-face assignment; silhouette gradients are handled separately by
/// soft_silhouette_backward.
inline RenderGrads accumulate_gradients(const GBuffer& gbuf,
                                        const TriMesh& mesh,
                                        const Camera& camera,
                                        const TextureFootprint* footprint,
                                        const PixelGrads& grads) {
  RenderGrads out =
      RenderGrads::zeros(mesh, footprint ? footprint->tex_size : 0);
  if (grads.normal_image)
    shade_normal_backward(gbuf, mesh, camera, *grads.normal_image,
                          out.d_normals);
  if (grads.depth_image)
    shade_depth_backward(gbuf, mesh, camera, *grads.depth_image,
                         out.d_positions);
  if (grads.texture_image) {
    if (!footprint)
      throw InvalidArgument("accumulate_gradients: texture grads need a footprint");
    shade_texture_backward(gbuf, *footprint, *grads.texture_image,
                           out.d_texels);
  }
  return out;
}

/// Composes the upstream Jacobians: vertex-normal gradients flow into
/// vertex positions, then both flow through Marching Tetrahedra into
/// (sdf, deform).
inline DmtetGrads geometry_backward(const TriMesh& mesh,
                                    const MtBackward& mt,
                                    const TetGrid& grid,
                                    std::vector<Vec3> d_positions,
                                    const std::vector<Vec3>& d_normals) {
  if (d_positions.size() != mesh.positions.size())
    d_positions.resize(mesh.positions.size(), Vec3::Zero());
  if (!d_normals.empty())
    vertex_normals_backward(mesh, d_normals, d_positions);
  DmtetGrads grads = DmtetGrads::zeros(grid);
  mt_backward_positions(mt, d_positions, grads);
  return grads;
}

}  // namespace sculpt
