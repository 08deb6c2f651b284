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

#include <cstdint>
#include <map>
#include <vector>

#include "sculpt/tetra/mesh.hpp"

namespace sculpt {

/// Icosphere with the given subdivision level (0 = icosahedron). Outward
/// winding, deterministic vertex order.
inline TriMesh make_icosphere(Scalar radius = 1.0, int subdivisions = 2,
                              const Vec3& center = Vec3::Zero()) {
  const Scalar t = (1.0 + std::sqrt(5.0)) / 2.0;
  TriMesh mesh;
  mesh.positions = {
      {-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0},
      {0, -1, t}, {0, 1, t},  {0, -1, -t}, {0, 1, -t},
      {t, 0, -1}, {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1},
  };
  mesh.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

  for (Vec3& p : mesh.positions) p.normalize();

  for (int level = 0; level < subdivisions; ++level) {
    std::map<std::pair<Index, Index>, Index> midpoints;
    const auto midpoint = [&](Index a, Index b) -> Index {
      const auto key = std::minmax(a, b);
      auto it = midpoints.find(key);
      if (it != midpoints.end()) return it->second;
      const Vec3 m = (mesh.positions[a] + mesh.positions[b]).normalized();
      const Index id = static_cast<Index>(mesh.positions.size());
      mesh.positions.push_back(m);
      midpoints.emplace(key, id);
      return id;
    };
    std::vector<std::array<Index, 3>> faces;
    faces.reserve(mesh.faces.size() * 4);
    for (const auto& f : mesh.faces) {
      const Index ab = midpoint(f[0], f[1]);
      const Index bc = midpoint(f[1], f[2]);
      const Index ca = midpoint(f[2], f[0]);
      faces.push_back({f[0], ab, ca});
      faces.push_back({f[1], bc, ab});
      faces.push_back({f[2], ca, bc});
      faces.push_back({ab, bc, ca});
    }
    mesh.faces = std::move(faces);
  }

  for (Vec3& p : mesh.positions) p = center + radius * p;
  return compute_vertex_normals(std::move(mesh));
}

/// Icosphere scaled per axis; normals recomputed after scaling.
inline TriMesh make_ellipsoid(const Vec3& radii, int subdivisions = 2,
                              const Vec3& center = Vec3::Zero()) {
  TriMesh mesh = make_icosphere(1.0, subdivisions);
  for (Vec3& p : mesh.positions)
    p = center + Vec3(p.x() * radii.x(), p.y() * radii.y(), p.z() * radii.z());
  return compute_vertex_normals(std::move(mesh));
}

/// Two coplanar triangles spanning [-half, half]^2 in the xy plane at z,
/// facing +z, with uvs covering [0, 1]^2.
inline TriMesh make_quad(Scalar half = 1.0, Scalar z = 0.0) {
  TriMesh mesh;
  mesh.positions = {{-half, -half, z},
                    {half, -half, z},
                    {half, half, z},
                    {-half, half, z}};
  mesh.faces = {{0, 1, 2}, {0, 2, 3}};
  mesh.uvs = {{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}};
  return compute_vertex_normals(std::move(mesh));
}

}  // namespace sculpt
