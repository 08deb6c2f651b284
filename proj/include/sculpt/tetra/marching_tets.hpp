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
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "sculpt/tetra/mesh.hpp"
#include "sculpt/tetra/tet_grid.hpp"

namespace sculpt {

/// How one extracted vertex depends on its generating grid edge (a, b),
/// a < b. The vertex sits at (1-t) * pa + t * pb on the deformed edge.
struct MtVertexRecord {
  Index grid_a = 0;
  Index grid_b = 0;
  Scalar t = 0.0;
  Vec3 edge_vec = Vec3::Zero();  // deformed pb - deformed pa
  Scalar dt_dsa = 0.0;
  Scalar dt_dsb = 0.0;
};

/// Analytic Jacobian data of marching_tetrahedra, one record per mesh vertex.
struct MtBackward {
  std::vector<MtVertexRecord> vertices;
};

/// Gradients with respect to the DMTet parameters.
struct DmtetGrads {
  std::vector<Scalar> sdf;
  std::vector<Vec3> deform;

  static DmtetGrads zeros(const TetGrid& grid) {
    DmtetGrads g;
    g.sdf.assign(grid.vertices.size(), 0.0);
    g.deform.assign(grid.vertices.size(), Vec3::Zero());
    return g;
  }
  void accumulate(const DmtetGrads& other) {
    for (std::size_t i = 0; i < sdf.size(); ++i) sdf[i] += other.sdf[i];
    for (std::size_t i = 0; i < deform.size(); ++i)
      deform[i] += other.deform[i];
  }
  void scale(Scalar s) {
    for (Scalar& v : sdf) v *= s;
    for (Vec3& v : deform) v *= s;
  }
};

namespace detail {

// Tet-local edges, indexed 0..5.
inline constexpr int kTetEdges[6][2] = {{0, 1}, {0, 2}, {0, 3},
                                        {1, 2}, {1, 3}, {2, 3}};

// Triangulation per sign case (bit k set = vertex k inside, sdf < 0).
// Entries are edge ids; -1 terminates. Windings assume a positively
// oriented tet and give outward (inside-to-outside) facing normals.
inline constexpr int kMtTriangles[16][6] = {
    {-1, -1, -1, -1, -1, -1},  // 0000
    {0, 1, 2, -1, -1, -1},     // 0001: inside {0}
    {0, 4, 3, -1, -1, -1},     // 0010: inside {1}
    {1, 2, 4, 1, 4, 3},        // 0011: inside {0,1}
    {5, 1, 3, -1, -1, -1},     // 0100: inside {2}
    {2, 0, 3, 2, 3, 5},        // 0101: inside {0,2}
    {0, 4, 5, 0, 5, 1},        // 0110: inside {1,2}
    {5, 2, 4, -1, -1, -1},     // 0111: outside {3}
    {5, 4, 2, -1, -1, -1},     // 1000: inside {3}
    {0, 1, 5, 0, 5, 4},        // 1001: inside {0,3}
    {3, 0, 2, 3, 2, 5},        // 1010: inside {1,3}
    {5, 3, 1, -1, -1, -1},     // 1011: outside {2}
    {1, 3, 4, 1, 4, 2},        // 1100: inside {2,3}
    {0, 3, 4, -1, -1, -1},     // 1101: outside {1}
    {0, 2, 1, -1, -1, -1},     // 1110: outside {0}
    {-1, -1, -1, -1, -1, -1},  // 1111
};

}  // namespace detail

struct MtResult {
  TriMesh mesh;
  MtBackward backward;
};

/// Marching Tetrahedra over the deformed grid. Vertices are placed at the
/// linear zero crossing of the sdf along cut edges; inside is sdf < 0 and
/// triangle windings face outward. All-positive or all-negative fields give
/// an empty mesh. Output order is a deterministic function of the inputs.
inline MtResult marching_tetrahedra_with_backward(const TetGrid& grid,
                                                  const DmtetParams& params) {
  validate_params(params, grid);

  MtResult out;
  const Scalar scale = grid.bounds.extent().maxCoeff();
  const Scalar min_area = 1e-12 * scale * scale;

  std::unordered_map<std::uint64_t, Index> edge_to_vertex;
  edge_to_vertex.reserve(1024);

  auto edge_vertex = [&](Index ga, Index gb) -> Index {
    if (ga > gb) std::swap(ga, gb);
    const std::uint64_t key =
        (static_cast<std::uint64_t>(ga) << 32) | static_cast<std::uint32_t>(gb);
    auto it = edge_to_vertex.find(key);
    if (it != edge_to_vertex.end()) return it->second;

    const Scalar sa = params.sdf[ga];
    const Scalar sb = params.sdf[gb];
    const Scalar denom = sa - sb;
    const Scalar t = sa / denom;
    const Vec3 pa = grid.vertices[ga] + params.deform[ga];
    const Vec3 pb = grid.vertices[gb] + params.deform[gb];

    MtVertexRecord rec;
    rec.grid_a = ga;
    rec.grid_b = gb;
    rec.t = t;
    rec.edge_vec = pb - pa;
    rec.dt_dsa = -sb / (denom * denom);
    rec.dt_dsb = sa / (denom * denom);

    const Index id = static_cast<Index>(out.mesh.positions.size());
    out.mesh.positions.push_back(pa + t * (pb - pa));
    out.backward.vertices.push_back(rec);
    edge_to_vertex.emplace(key, id);
    return id;
  };

  for (const auto& tet : grid.tets) {
    int code = 0;
    for (int k = 0; k < 4; ++k)
      if (params.sdf[tet[k]] < 0.0) code |= 1 << k;
    const int* tris = detail::kMtTriangles[code];
    for (int e = 0; e < 6 && tris[e] >= 0; e += 3) {
      std::array<Index, 3> face;
      for (int k = 0; k < 3; ++k) {
        const int* edge = detail::kTetEdges[tris[e + k]];
        face[k] = edge_vertex(tet[edge[0]], tet[edge[1]]);
      }
      out.mesh.faces.push_back(face);
    }
  }

  // Sliver filter: zero crossings landing on grid vertices create
  // zero-area triangles.
  std::vector<std::array<Index, 3>> kept;
  kept.reserve(out.mesh.faces.size());
  for (const auto& face : out.mesh.faces) {
    const Vec3 n = (out.mesh.positions[face[1]] - out.mesh.positions[face[0]])
                       .cross(out.mesh.positions[face[2]] -
                              out.mesh.positions[face[0]]);
    if (0.5 * n.norm() >= min_area) kept.push_back(face);
  }
  out.mesh.faces = std::move(kept);
  return out;
}

inline TriMesh marching_tetrahedra(const TetGrid& grid,
                                   const DmtetParams& params) {
  return marching_tetrahedra_with_backward(grid, params).mesh;
}

/// Routes gradients w.r.t. extracted vertex positions back to (sdf, deform).
inline void mt_backward_positions(const MtBackward& backward,
                                  const std::vector<Vec3>& grad_positions,
                                  DmtetGrads& grads) {
  if (grad_positions.size() != backward.vertices.size())
    throw InvalidArgument("mt_backward_positions: gradient size mismatch");
  for (std::size_t v = 0; v < backward.vertices.size(); ++v) {
    const MtVertexRecord& rec = backward.vertices[v];
    const Vec3& g = grad_positions[v];
    // v = pa + t (pb - pa), t = sa / (sa - sb)
    const Scalar g_dot_edge = g.dot(rec.edge_vec);
    grads.sdf[rec.grid_a] += g_dot_edge * rec.dt_dsa;
    grads.sdf[rec.grid_b] += g_dot_edge * rec.dt_dsb;
    grads.deform[rec.grid_a] += (1.0 - rec.t) * g;
    grads.deform[rec.grid_b] += rec.t * g;
  }
}

}  // namespace sculpt
