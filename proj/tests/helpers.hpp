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

// Test-only oracles and utilities. These stay independent of the library
// implementations they are used to check.

#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <utility>

#include "sculpt/core/rng.hpp"
#include "sculpt/tetra/mesh.hpp"

namespace sculpt::testing {

/// Every edge is shared by exactly two faces.
inline bool is_watertight(const TriMesh& mesh) {
  std::map<std::pair<Index, Index>, int> edges;
  for (const auto& f : mesh.faces)
    for (int k = 0; k < 3; ++k) {
      const Index a = f[k];
      const Index b = f[(k + 1) % 3];
      edges[std::minmax(a, b)]++;
    }
  for (const auto& [edge, count] : edges)
    if (count != 2) return false;
  return !edges.empty();
}

/// V - E + F over referenced vertices.
inline long euler_characteristic(const TriMesh& mesh) {
  std::map<std::pair<Index, Index>, int> edges;
  std::map<Index, int> verts;
  for (const auto& f : mesh.faces) {
    for (int k = 0; k < 3; ++k) {
      verts[f[k]]++;
      edges[std::minmax(f[k], f[(k + 1) % 3])]++;
    }
  }
  return static_cast<long>(verts.size()) - static_cast<long>(edges.size()) +
         static_cast<long>(mesh.faces.size());
}

/// Independent ray/triangle oracle: solves the barycentric linear system by
/// Cramer's rule (a different formulation from the library's).
inline std::optional<Scalar> oracle_ray_triangle(const Vec3& origin,
                                                 const Vec3& dir,
                                                 const Vec3& a, const Vec3& b,
                                                 const Vec3& c) {
  // origin + t dir = a + u (b - a) + v (c - a)
  Mat3 m;
  m.col(0) = b - a;
  m.col(1) = c - a;
  m.col(2) = -dir;
  const Scalar det = m.determinant();
  if (std::abs(det) < 1e-14) return std::nullopt;
  const Vec3 rhs = origin - a;
  Mat3 mu = m, mv = m, mt = m;
  mu.col(0) = rhs;
  mv.col(1) = rhs;
  mt.col(2) = rhs;
  const Scalar u = mu.determinant() / det;
  const Scalar v = mv.determinant() / det;
  const Scalar t = mt.determinant() / det;
  if (u < 0.0 || v < 0.0 || u + v > 1.0) return std::nullopt;
  return t;
}

struct OracleHit {
  Scalar t;
  Index face;
};

/// Brute-force scan over every triangle; ties resolved toward lower face id.
inline std::optional<OracleHit> oracle_ray_mesh(const TriMesh& mesh,
                                                const Vec3& origin,
                                                const Vec3& dir,
                                                Scalar t_eps = 1e-12) {
  std::optional<OracleHit> best;
  for (Index f = 0; f < static_cast<Index>(mesh.faces.size()); ++f) {
    const auto& tri = mesh.faces[f];
    const auto t = oracle_ray_triangle(origin, dir, mesh.positions[tri[0]],
                                       mesh.positions[tri[1]],
                                       mesh.positions[tri[2]]);
    if (!t || *t <= t_eps) continue;
    if (!best || *t < best->t) best = OracleHit{*t, f};
  }
  return best;
}

inline Mat3 random_rotation(Rng& rng) {
  // Uniformly random unit quaternion.
  Vec4 q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
  q.normalize();
  return Eigen::Quaternion<Scalar>(q[0], q[1], q[2], q[3])
      .toRotationMatrix();
}

/// Area-weighted random surface samples with a fixed seed.
inline std::vector<Vec3> sample_surface(const TriMesh& mesh, int count,
                                        std::uint64_t seed) {
  std::vector<Scalar> cumulative(mesh.faces.size());
  Scalar total = 0.0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    total += face_area(mesh, static_cast<Index>(f));
    cumulative[f] = total;
  }
  Rng rng(seed);
  std::vector<Vec3> points;
  points.reserve(count);
  for (int i = 0; i < count; ++i) {
    const Scalar pick = rng.uniform() * total;
    const std::size_t f =
        std::lower_bound(cumulative.begin(), cumulative.end(), pick) -
        cumulative.begin();
    const auto& tri = mesh.faces[std::min(f, mesh.faces.size() - 1)];
    Scalar u = rng.uniform();
    Scalar v = rng.uniform();
    if (u + v > 1.0) {
      u = 1.0 - u;
      v = 1.0 - v;
    }
    points.push_back(mesh.positions[tri[0]] +
                     u * (mesh.positions[tri[1]] - mesh.positions[tri[0]]) +
                     v * (mesh.positions[tri[2]] - mesh.positions[tri[0]]));
  }
  return points;
}

}  // namespace sculpt::testing
