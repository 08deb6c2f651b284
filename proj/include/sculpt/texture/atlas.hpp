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
#include <deque>
#include <map>
#include <numeric>
#include <vector>

#include "sculpt/tetra/mesh.hpp"

namespace sculpt {

struct UvChart {
  std::vector<Index> faces;
  Vec3 plane_normal = Vec3::UnitZ();
  Vec3 basis_u = Vec3::UnitX();
  Vec3 basis_v = Vec3::UnitY();
  Vec2 world_min = Vec2::Zero();  // chart-plane bbox, world units
  Vec2 world_size = Vec2::Zero();
  int px_x = 0, px_y = 0;         // placement in the atlas, texels
  int px_w = 0, px_h = 0;         // box size including the gutter inset
};

struct UvAtlas {
  int atlas_size = 0;
  int gutter = 0;
  Scalar world_to_texel = 0.0;
  std::vector<int> face_chart;    // original face -> chart id
  std::vector<UvChart> charts;
};

struct UnwrapResult {
  TriMesh mesh;  // vertices split per chart, uvs assigned
  UvAtlas atlas;
};

namespace detail {

/// Normal-based region growing from the lowest unassigned face; membership
/// by angle to the seed normal.
inline std::vector<std::vector<Index>> grow_charts(const TriMesh& mesh,
                                                   Scalar angle_threshold) {
  std::map<std::pair<Index, Index>, std::vector<Index>> edge_faces;
  for (Index f = 0; f < static_cast<Index>(mesh.faces.size()); ++f) {
    const auto& tri = mesh.faces[f];
    for (int k = 0; k < 3; ++k)
      edge_faces[std::minmax(tri[k], tri[(k + 1) % 3])].push_back(f);
  }
  std::vector<Vec3> normals(mesh.faces.size());
  for (Index f = 0; f < static_cast<Index>(mesh.faces.size()); ++f) {
    const Vec3 n = face_normal_scaled(mesh, f);
    normals[f] = n.norm() > 0.0 ? Vec3(n.normalized()) : Vec3::UnitZ();
  }

  const Scalar cos_threshold = std::cos(angle_threshold);
  std::vector<int> chart_of(mesh.faces.size(), -1);
  std::vector<std::vector<Index>> charts;
  for (Index seed = 0; seed < static_cast<Index>(mesh.faces.size()); ++seed) {
    if (chart_of[seed] >= 0) continue;
    const int chart_id = static_cast<int>(charts.size());
    charts.emplace_back();
    std::deque<Index> frontier{seed};
    chart_of[seed] = chart_id;
    while (!frontier.empty()) {
      const Index f = frontier.front();
      frontier.pop_front();
      charts.back().push_back(f);
      const auto& tri = mesh.faces[f];
      for (int k = 0; k < 3; ++k) {
        const auto it =
            edge_faces.find(std::minmax(tri[k], tri[(k + 1) % 3]));
        for (Index neighbor : it->second) {
          if (chart_of[neighbor] >= 0) continue;
          if (normals[neighbor].dot(normals[seed]) < cos_threshold) continue;
          chart_of[neighbor] = chart_id;
          frontier.push_back(neighbor);
        }
      }
    }
    std::sort(charts.back().begin(), charts.back().end());
  }
  return charts;
}

/// Shelf packing at a fixed scale. Returns false on overflow; placements
/// are written into the charts.
inline bool shelf_pack(std::vector<UvChart>& charts, Scalar scale,
                       int atlas_size, int gutter) {
  std::vector<int> order(charts.size());
  std::iota(order.begin(), order.end(), 0);
  for (UvChart& chart : charts) {
    chart.px_w = static_cast<int>(std::ceil(chart.world_size.x() * scale)) +
                 2 * gutter + 1;
    chart.px_h = static_cast<int>(std::ceil(chart.world_size.y() * scale)) +
                 2 * gutter + 1;
    if (chart.px_w > atlas_size || chart.px_h > atlas_size) return false;
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return charts[a].px_h > charts[b].px_h;
  });
  int shelf_y = 0, shelf_height = 0, cursor_x = 0;
  for (int id : order) {
    UvChart& chart = charts[id];
    if (cursor_x + chart.px_w > atlas_size) {
      shelf_y += shelf_height;
      shelf_height = 0;
      cursor_x = 0;
    }
    if (shelf_y + chart.px_h > atlas_size) return false;
    chart.px_x = cursor_x;
    chart.px_y = shelf_y;
    cursor_x += chart.px_w;
    shelf_height = std::max(shelf_height, chart.px_h);
  }
  return true;
}

}  // namespace detail

/// Unwraps a mesh into normal-clustered planar charts packed on a shelf
/// atlas. Chart content is inset by the gutter so packed boxes meeting
/// edge-to-edge keep their content apart. Vertices are split per chart, so
/// the output mesh has per-vertex uvs; all other attributes are carried
/// over. Deterministic.
inline UnwrapResult unwrap_uv(const TriMesh& mesh, int atlas_size = 1024,
                              int gutter = 4,
                              Scalar angle_threshold_deg = 60.0) {
  if (mesh.empty()) throw InvalidArgument("unwrap_uv: empty mesh");
  if (atlas_size < 4 * gutter + 4)
    throw InvalidArgument("unwrap_uv: atlas too small for the gutter");

  UnwrapResult out;
  out.atlas.atlas_size = atlas_size;
  out.atlas.gutter = gutter;
  out.atlas.face_chart.assign(mesh.faces.size(), -1);

  const auto groups =
      detail::grow_charts(mesh, deg_to_rad(angle_threshold_deg));
  out.atlas.charts.resize(groups.size());
  for (std::size_t c = 0; c < groups.size(); ++c) {
    UvChart& chart = out.atlas.charts[c];
    chart.faces = groups[c];
    for (Index f : chart.faces) out.atlas.face_chart[f] = static_cast<int>(c);

    // Area-weighted average plane.
    Vec3 normal_sum = Vec3::Zero();
    for (Index f : chart.faces) normal_sum += face_normal_scaled(mesh, f);
    chart.plane_normal = normal_sum.norm() > 0.0
                             ? Vec3(normal_sum.normalized())
                             : Vec3::UnitZ();
    Vec3 helper = std::abs(chart.plane_normal.z()) < 0.9 ? Vec3::UnitZ()
                                                         : Vec3::UnitX();
    chart.basis_u = helper.cross(chart.plane_normal).normalized();
    chart.basis_v = chart.plane_normal.cross(chart.basis_u);

    Vec2 lo(std::numeric_limits<Scalar>::max(),
            std::numeric_limits<Scalar>::max());
    Vec2 hi = -lo;
    for (Index f : chart.faces)
      for (Index v : mesh.faces[f]) {
        const Vec2 p(mesh.positions[v].dot(chart.basis_u),
                     mesh.positions[v].dot(chart.basis_v));
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
      }
    chart.world_min = lo;
    chart.world_size = (hi - lo).cwiseMax(Vec2(1e-12, 1e-12));
  }

  // Largest scale that packs: bisection between 0 and the single-chart
  // bound, which stands in for retry-with-smaller-scale.
  Scalar max_dim = 1e-12;
  for (const UvChart& chart : out.atlas.charts)
    max_dim = std::max({max_dim, chart.world_size.x(), chart.world_size.y()});
  Scalar hi_scale = (atlas_size - 2 * gutter - 1) / max_dim;
  if (!detail::shelf_pack(out.atlas.charts, 0.0, atlas_size, gutter))
    throw InvalidArgument("unwrap_uv: atlas overflow at zero scale");
  Scalar lo_scale = 0.0;
  for (int iter = 0; iter < 40; ++iter) {
    const Scalar mid = 0.5 * (lo_scale + hi_scale);
    if (detail::shelf_pack(out.atlas.charts, mid, atlas_size, gutter))
      lo_scale = mid;
    else
      hi_scale = mid;
  }
  if (!detail::shelf_pack(out.atlas.charts, lo_scale, atlas_size, gutter))
    throw InvalidArgument("unwrap_uv: atlas overflow");
  out.atlas.world_to_texel = lo_scale;

  // Rebuild the mesh with per-chart vertex splits and uv assignment.
  const bool carry_normals = mesh.has_normals();
  for (std::size_t c = 0; c < out.atlas.charts.size(); ++c) {
    const UvChart& chart = out.atlas.charts[c];
    std::map<Index, Index> local;
    for (Index f : chart.faces) {
      std::array<Index, 3> corners;
      for (int k = 0; k < 3; ++k) {
        const Index v = mesh.faces[f][k];
        auto it = local.find(v);
        if (it == local.end()) {
          const Index id = static_cast<Index>(out.mesh.positions.size());
          out.mesh.positions.push_back(mesh.positions[v]);
          if (carry_normals)
            out.mesh.vertex_normals.push_back(mesh.vertex_normals[v]);
          const Vec2 plane(mesh.positions[v].dot(chart.basis_u),
                           mesh.positions[v].dot(chart.basis_v));
          const Vec2 px =
              Vec2(chart.px_x + gutter, chart.px_y + gutter) +
              (plane - chart.world_min) * lo_scale;
          out.mesh.uvs.push_back(Vec2(
              px.x() / atlas_size, 1.0 - px.y() / atlas_size));
          it = local.emplace(v, id).first;
        }
        corners[k] = it->second;
      }
      out.mesh.faces.push_back(corners);
    }
  }
  if (!carry_normals) out.mesh = compute_vertex_normals(std::move(out.mesh));
  return out;
}

/// Per-texel surface lookup: the face owning each texel center in uv space
/// plus the interpolated world position and normal. Texels outside every uv
/// triangle are unoccupied (face -1). Occupancy is dilated by a few rings
/// into the gutters (copying the nearest boundary surface point), so
/// bilinear reads near chart borders always land on owned texels; this is
/// also the gutter fill applied to exported textures.
struct TexelTable {
  int size = 0;
  std::vector<Index> face;
  std::vector<Vec3> position;
  std::vector<Vec3> normal;
  std::size_t occupied = 0;

  bool is_occupied(int x, int y) const {
    return face[static_cast<std::size_t>(y) * size + x] >= 0;
  }
};

inline TexelTable build_texel_table(const TriMesh& mesh, int atlas_size,
                                    int dilation_rings = 4) {
  if (!mesh.has_uvs())
    throw InvalidArgument("build_texel_table: mesh has no uvs");
  TexelTable table;
  table.size = atlas_size;
  const std::size_t n = static_cast<std::size_t>(atlas_size) * atlas_size;
  table.face.assign(n, -1);
  table.position.assign(n, Vec3::Zero());
  table.normal.assign(n, Vec3::Zero());

  for (Index f = 0; f < static_cast<Index>(mesh.faces.size()); ++f) {
    const auto& tri = mesh.faces[f];
    // uv -> texel coordinates (row 0 is v = 1).
    Vec2 p[3];
    for (int k = 0; k < 3; ++k)
      p[k] = Vec2(mesh.uvs[tri[k]].x() * atlas_size,
                  (1.0 - mesh.uvs[tri[k]].y()) * atlas_size);
    const Scalar area2 = (p[1] - p[0]).x() * (p[2] - p[0]).y() -
                         (p[1] - p[0]).y() * (p[2] - p[0]).x();
    if (std::abs(area2) < 1e-14) continue;
    const int x0 = std::max(0, static_cast<int>(std::floor(
                                   std::min({p[0].x(), p[1].x(), p[2].x()}))));
    const int x1 = std::min(atlas_size - 1,
                            static_cast<int>(std::ceil(std::max(
                                {p[0].x(), p[1].x(), p[2].x()}))));
    const int y0 = std::max(0, static_cast<int>(std::floor(
                                   std::min({p[0].y(), p[1].y(), p[2].y()}))));
    const int y1 = std::min(atlas_size - 1,
                            static_cast<int>(std::ceil(std::max(
                                {p[0].y(), p[1].y(), p[2].y()}))));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * atlas_size + x;
        if (table.face[i] >= 0) continue;  // first writer wins
        const Vec2 q(x + 0.5, y + 0.5);
        const Scalar w0 = ((p[2] - p[1]).x() * (q - p[1]).y() -
                           (p[2] - p[1]).y() * (q - p[1]).x()) /
                          area2;
        const Scalar w1 = ((p[0] - p[2]).x() * (q - p[2]).y() -
                           (p[0] - p[2]).y() * (q - p[2]).x()) /
                          area2;
        const Scalar w2 = 1.0 - w0 - w1;
        if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) continue;
        table.face[i] = f;
        table.position[i] = w0 * mesh.positions[tri[0]] +
                            w1 * mesh.positions[tri[1]] +
                            w2 * mesh.positions[tri[2]];
        Vec3 nrm = w0 * mesh.vertex_normals[tri[0]] +
                   w1 * mesh.vertex_normals[tri[1]] +
                   w2 * mesh.vertex_normals[tri[2]];
        const Scalar len = nrm.norm();
        table.normal[i] = len > 0.0 ? Vec3(nrm / len) : Vec3::Zero();
        ++table.occupied;
      }
    }
  }

  // Conservative gutter rings: copy the nearest boundary entry outward.
  std::deque<std::pair<int, int>> frontier;
  for (int y = 0; y < atlas_size; ++y)
    for (int x = 0; x < atlas_size; ++x)
      if (table.is_occupied(x, y)) frontier.emplace_back(x, y);
  for (int ring = 0; ring < dilation_rings && !frontier.empty(); ++ring) {
    std::deque<std::pair<int, int>> next;
    for (const auto& [x, y] : frontier) {
      const std::size_t src = static_cast<std::size_t>(y) * atlas_size + x;
      static constexpr int kSteps[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
      for (const auto& step : kSteps) {
        const int nx = x + step[0];
        const int ny = y + step[1];
        if (nx < 0 || ny < 0 || nx >= atlas_size || ny >= atlas_size) continue;
        const std::size_t i = static_cast<std::size_t>(ny) * atlas_size + nx;
        if (table.face[i] >= 0) continue;
        table.face[i] = table.face[src];
        table.position[i] = table.position[src];
        table.normal[i] = table.normal[src];
        ++table.occupied;
        next.emplace_back(nx, ny);
      }
    }
    frontier.swap(next);
  }
  return table;
}

}  // namespace sculpt
