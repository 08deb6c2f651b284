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

#include <array>
#include <vector>

#include "sculpt/core/error.hpp"
#include "sculpt/core/types.hpp"

namespace sculpt {

/// Indexed triangle mesh. vertex_normals and uvs are optional; when present
/// they are per-vertex and sized like positions.
struct TriMesh {
  std::vector<Vec3> positions;
  std::vector<std::array<Index, 3>> faces;
  std::vector<Vec3> vertex_normals;
  std::vector<Vec2> uvs;

  bool has_normals() const {
    return !vertex_normals.empty() &&
           vertex_normals.size() == positions.size();
  }
  bool has_uvs() const {
    return !uvs.empty() && uvs.size() == positions.size();
  }
  bool empty() const { return faces.empty(); }

  Box3 bounds() const {
    Box3 b;
    for (const Vec3& p : positions) b.expand(p);
    return b;
  }
};

/// Cross product of the first two edges; length is twice the face area.
inline Vec3 face_normal_scaled(const TriMesh& mesh, Index f) {
  const auto& tri = mesh.faces[f];
  const Vec3& a = mesh.positions[tri[0]];
  const Vec3& b = mesh.positions[tri[1]];
  const Vec3& c = mesh.positions[tri[2]];
  return (b - a).cross(c - a);
}

inline Scalar face_area(const TriMesh& mesh, Index f) {
  return 0.5 * face_normal_scaled(mesh, f).norm();
}

inline Scalar total_area(const TriMesh& mesh) {
  Scalar area = 0.0;
  for (Index f = 0; f < static_cast<Index>(mesh.faces.size()); ++f)
    area += face_area(mesh, f);
  return area;
}

/// Area-weighted vertex normals (summing unnormalized face cross products
/// weights each face by its area). Isolated vertices keep an exact zero
/// vector instead of being normalized.
inline TriMesh compute_vertex_normals(TriMesh mesh) {
  std::vector<Vec3> sums(mesh.positions.size(), Vec3::Zero());
  for (Index f = 0; f < static_cast<Index>(mesh.faces.size()); ++f) {
    const Vec3 n = face_normal_scaled(mesh, f);
    for (int k = 0; k < 3; ++k) sums[mesh.faces[f][k]] += n;
  }
  mesh.vertex_normals.resize(mesh.positions.size());
  for (std::size_t v = 0; v < sums.size(); ++v) {
    const Scalar len = sums[v].norm();
    mesh.vertex_normals[v] = len > 0.0 ? Vec3(sums[v] / len) : Vec3::Zero();
  }
  return mesh;
}

/// Backward pass of compute_vertex_normals: routes per-vertex normal
/// gradients into per-vertex position gradients, accumulating into grad_pos.
inline void vertex_normals_backward(const TriMesh& mesh,
                                    const std::vector<Vec3>& grad_normals,
                                    std::vector<Vec3>& grad_pos) {
  if (grad_normals.size() != mesh.positions.size())
    throw InvalidArgument("vertex_normals_backward: gradient size mismatch");
  if (grad_pos.size() != mesh.positions.size())
    grad_pos.resize(mesh.positions.size(), Vec3::Zero());

  // Recompute the pre-normalization sums, then push gradients through the
  // normalization u = s/|s|:  dL/ds = (I - u u^T)/|s| * dL/du.
  std::vector<Vec3> sums(mesh.positions.size(), Vec3::Zero());
  for (Index f = 0; f < static_cast<Index>(mesh.faces.size()); ++f) {
    const Vec3 n = face_normal_scaled(mesh, f);
    for (int k = 0; k < 3; ++k) sums[mesh.faces[f][k]] += n;
  }
  std::vector<Vec3> grad_sums(mesh.positions.size(), Vec3::Zero());
  for (std::size_t v = 0; v < sums.size(); ++v) {
    const Scalar len = sums[v].norm();
    if (len <= 0.0) continue;
    const Vec3 u = sums[v] / len;
    grad_sums[v] = (grad_normals[v] - u * u.dot(grad_normals[v])) / len;
  }
  // n_f = (b-a) x (c-a); each face's n contributes to its three vertex sums.
  for (Index f = 0; f < static_cast<Index>(mesh.faces.size()); ++f) {
    const auto& tri = mesh.faces[f];
    const Vec3 g = grad_sums[tri[0]] + grad_sums[tri[1]] + grad_sums[tri[2]];
    const Vec3& a = mesh.positions[tri[0]];
    const Vec3& b = mesh.positions[tri[1]];
    const Vec3& c = mesh.positions[tri[2]];
    const Vec3 e1 = b - a;
    const Vec3 e2 = c - a;
    const Vec3 ge1 = e2.cross(g);   // d(e1 x e2)/d(e1)^T g
    const Vec3 ge2 = g.cross(e1);   // d(e1 x e2)/d(e2)^T g
    grad_pos[tri[1]] += ge1;
    grad_pos[tri[2]] += ge2;
    grad_pos[tri[0]] -= ge1 + ge2;
  }
}

}  // namespace sculpt
