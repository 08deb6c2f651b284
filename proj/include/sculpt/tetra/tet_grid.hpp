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
#include <cmath>
#include <cstdint>
#include <vector>

#include "sculpt/core/error.hpp"
#include "sculpt/core/types.hpp"

namespace sculpt {

/// Fraction of the cell edge a grid vertex may be displaced by. Keeps all
/// tetrahedra non-inverted under the 6-tet cube subdivision.
inline constexpr Scalar kDeformLimitFraction = 0.45;

/// Uniform tetrahedral grid over an axis-aligned box. Each cube cell is cut
/// into the six path tetrahedra of the Kuhn subdivision; cells are mirrored
/// per axis by index parity so faces between neighbouring cells match.
struct TetGrid {
  int resolution = 0;  // cells per axis
  Box3 bounds;
  std::vector<Vec3> vertices;                // (resolution+1)^3 lattice
  std::vector<std::array<Index, 4>> tets;    // positively oriented

  int verts_per_axis() const { return resolution + 1; }

  Index vertex_index(int ix, int iy, int iz) const {
    const int n = verts_per_axis();
    return static_cast<Index>((static_cast<std::int64_t>(iz) * n + iy) * n +
                              ix);
  }

  /// Shortest cell edge over the three axes.
  Scalar cell_edge() const {
    return (bounds.extent() / static_cast<Scalar>(resolution)).minCoeff();
  }

  Scalar deform_limit() const { return kDeformLimitFraction * cell_edge(); }
};

inline std::int64_t tet_grid_vertex_count(int resolution) {
  const std::int64_t n = resolution + 1;
  return n * n * n;
}

inline std::int64_t tet_grid_tet_count(int resolution) {
  const std::int64_t n = resolution;
  return 6 * n * n * n;
}

inline TetGrid build_tet_grid(int resolution, const Box3& bounds) {
  if (resolution < 2)
    throw InvalidArgument("build_tet_grid: resolution must be >= 2");
  if (!bounds.valid() || (bounds.extent().array() <= 0.0).any())
    throw InvalidArgument("build_tet_grid: bounds are degenerate");

  TetGrid grid;
  grid.resolution = resolution;
  grid.bounds = bounds;

  const int n = grid.verts_per_axis();
  grid.vertices.reserve(tet_grid_vertex_count(resolution));
  const Vec3 step = bounds.extent() / static_cast<Scalar>(resolution);
  for (int iz = 0; iz < n; ++iz)
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix)
        grid.vertices.push_back(bounds.min +
                                Vec3(ix * step.x(), iy * step.y(),
                                     iz * step.z()));

  // Kuhn subdivision: one tet per permutation of the axis walk 000 -> 111.
  static constexpr int kAxisOrders[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                            {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  grid.tets.reserve(tet_grid_tet_count(resolution));
  for (int iz = 0; iz < resolution; ++iz) {
    for (int iy = 0; iy < resolution; ++iy) {
      for (int ix = 0; ix < resolution; ++ix) {
        const bool flip[3] = {(ix & 1) != 0, (iy & 1) != 0, (iz & 1) != 0};
        const int base[3] = {ix, iy, iz};
        for (const auto& order : kAxisOrders) {
          std::array<Index, 4> tet;
          int corner[3] = {0, 0, 0};
          for (int k = 0; k < 4; ++k) {
            if (k > 0) corner[order[k - 1]] = 1;
            int coords[3];
            for (int a = 0; a < 3; ++a) {
              const int c = flip[a] ? 1 - corner[a] : corner[a];
              coords[a] = base[a] + c;
            }
            tet[k] = grid.vertex_index(coords[0], coords[1], coords[2]);
          }
          // Mirrored cells produce negative volumes; swap to restore the
          // canonical positive orientation.
          const Vec3& p0 = grid.vertices[tet[0]];
          const Scalar vol = (grid.vertices[tet[1]] - p0)
                                 .cross(grid.vertices[tet[2]] - p0)
                                 .dot(grid.vertices[tet[3]] - p0);
          if (vol < 0.0) std::swap(tet[2], tet[3]);
          grid.tets.push_back(tet);
        }
      }
    }
  }
  return grid;
}

/// Optimized geometry parameters: a signed distance and a displacement per
/// grid vertex.
struct DmtetParams {
  std::vector<Scalar> sdf;
  std::vector<Vec3> deform;

  static DmtetParams zeros(const TetGrid& grid) {
    DmtetParams p;
    p.sdf.assign(grid.vertices.size(), 0.0);
    p.deform.assign(grid.vertices.size(), Vec3::Zero());
    return p;
  }

  bool sized_for(const TetGrid& grid) const {
    return sdf.size() == grid.vertices.size() &&
           deform.size() == grid.vertices.size();
  }
};

/// Projects every displacement back inside the deform limit.
inline void clamp_deform(DmtetParams& params, const TetGrid& grid) {
  const Scalar limit = grid.deform_limit();
  for (Vec3& d : params.deform) {
    const Scalar len = d.norm();
    if (len > limit) d *= limit / len;
  }
}

inline void validate_params(const DmtetParams& params, const TetGrid& grid) {
  if (!params.sized_for(grid))
    throw InvalidArgument("DmtetParams not sized to grid");
  const Scalar limit = grid.deform_limit() * (1.0 + 1e-12);
  for (Scalar s : params.sdf)
    if (!std::isfinite(s)) throw InvalidArgument("DmtetParams: non-finite sdf");
  for (const Vec3& d : params.deform) {
    if (!d.allFinite())
      throw InvalidArgument("DmtetParams: non-finite deform");
    if (d.norm() > limit)
      throw InvalidArgument("DmtetParams: deform exceeds limit");
  }
}

}  // namespace sculpt
