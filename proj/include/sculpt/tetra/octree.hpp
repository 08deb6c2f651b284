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
#include <cmath>
#include <optional>
#include <vector>

#include "sculpt/tetra/mesh.hpp"

namespace sculpt {

namespace detail {

/// Triangle/box overlap by separating axis test (box face normals, triangle
/// normal, nine edge cross products).
inline bool tri_box_overlap(const Vec3& box_center, const Vec3& box_half,
                            const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 v0 = a - box_center;
  const Vec3 v1 = b - box_center;
  const Vec3 v2 = c - box_center;

  const auto axis_separates = [&](const Vec3& axis) {
    const Scalar p0 = v0.dot(axis);
    const Scalar p1 = v1.dot(axis);
    const Scalar p2 = v2.dot(axis);
    const Scalar r = box_half.x() * std::abs(axis.x()) +
                     box_half.y() * std::abs(axis.y()) +
                     box_half.z() * std::abs(axis.z());
    return std::min({p0, p1, p2}) > r || std::max({p0, p1, p2}) < -r;
  };

  for (int i = 0; i < 3; ++i) {
    const Scalar lo = std::min({v0[i], v1[i], v2[i]});
    const Scalar hi = std::max({v0[i], v1[i], v2[i]});
    if (lo > box_half[i] || hi < -box_half[i]) return false;
  }

  const Vec3 e0 = v1 - v0;
  const Vec3 e1 = v2 - v1;
  const Vec3 e2 = v0 - v2;
  if (axis_separates(e0.cross(e1))) return false;

  static const Vec3 kAxes[3] = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  for (const Vec3& u : kAxes) {
    if (axis_separates(u.cross(e0))) return false;
    if (axis_separates(u.cross(e1))) return false;
    if (axis_separates(u.cross(e2))) return false;
  }
  return true;
}

/// Moller-Trumbore. Returns the ray parameter t or nothing.
inline std::optional<Scalar> ray_triangle(const Vec3& origin, const Vec3& dir,
                                          const Vec3& a, const Vec3& b,
                                          const Vec3& c) {
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 pvec = dir.cross(e2);
  const Scalar det = e1.dot(pvec);
  if (std::abs(det) < 1e-14) return std::nullopt;
  const Scalar inv_det = 1.0 / det;
  const Vec3 tvec = origin - a;
  const Scalar u = tvec.dot(pvec) * inv_det;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  const Vec3 qvec = tvec.cross(e1);
  const Scalar v = dir.dot(qvec) * inv_det;
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  const Scalar t = e2.dot(qvec) * inv_det;
  return t;
}

/// Closest point on triangle abc to p (Ericson, Real-Time Collision
/// Detection 5.1.5).
inline Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a,
                                      const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const Scalar d1 = ab.dot(ap);
  const Scalar d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Vec3 bp = p - b;
  const Scalar d3 = ab.dot(bp);
  const Scalar d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const Scalar vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const Scalar v = d1 / (d1 - d3);
    return a + v * ab;
  }

  const Vec3 cp = p - c;
  const Scalar d5 = ab.dot(cp);
  const Scalar d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const Scalar vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const Scalar w = d2 / (d2 - d6);
    return a + w * ac;
  }

  const Scalar va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const Scalar w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return b + w * (c - b);
  }

  const Scalar denom = 1.0 / (va + vb + vc);
  const Scalar v = vb * denom;
  const Scalar w = vc * denom;
  return a + ab * v + ac * w;
}

}  // namespace detail

struct OctreeNode {
  Box3 box;
  std::array<Index, 8> children{-1, -1, -1, -1, -1, -1, -1, -1};
  std::vector<Index> triangles;  // leaves only
  bool leaf = true;
};

/// Loose-free octree over mesh triangles; a triangle is stored in every leaf
/// whose box it overlaps.
struct Octree {
  std::vector<OctreeNode> nodes;
  int max_leaf = 8;
  int max_depth = 12;

  const OctreeNode& root() const { return nodes.front(); }
};

inline Octree build_octree(const TriMesh& mesh, int max_leaf = 8,
                           int max_depth = 12) {
  if (mesh.empty()) throw InvalidArgument("build_octree: empty mesh");
  if (max_leaf < 1) throw InvalidArgument("build_octree: max_leaf must be >= 1");

  Octree tree;
  tree.max_leaf = max_leaf;
  tree.max_depth = max_depth;

  Box3 box = mesh.bounds();
  const Scalar pad = 1e-9 * (1.0 + box.extent().maxCoeff());
  box = box.inflated(pad);

  OctreeNode rootNode;
  rootNode.box = box;
  rootNode.triangles.resize(mesh.faces.size());
  for (Index f = 0; f < static_cast<Index>(mesh.faces.size()); ++f)
    rootNode.triangles[f] = f;
  tree.nodes.push_back(std::move(rootNode));

  struct Work {
    Index node;
    int depth;
  };
  std::vector<Work> stack{{0, 0}};
  while (!stack.empty()) {
    const Work work = stack.back();
    stack.pop_back();
    if (static_cast<int>(tree.nodes[work.node].triangles.size()) <= max_leaf ||
        work.depth >= max_depth)
      continue;

    // Copy out before pushing children; push_back invalidates references.
    const Box3 parent_box = tree.nodes[work.node].box;
    std::vector<Index> tris = std::move(tree.nodes[work.node].triangles);
    tree.nodes[work.node].triangles.clear();

    const Vec3 center = parent_box.center();
    std::array<OctreeNode, 8> candidates;
    bool any_shrunk = false;
    for (int child = 0; child < 8; ++child) {
      Box3 cb;
      cb.min = Vec3((child & 1) ? center.x() : parent_box.min.x(),
                    (child & 2) ? center.y() : parent_box.min.y(),
                    (child & 4) ? center.z() : parent_box.min.z());
      cb.max = Vec3((child & 1) ? parent_box.max.x() : center.x(),
                    (child & 2) ? parent_box.max.y() : center.y(),
                    (child & 4) ? parent_box.max.z() : center.z());
      OctreeNode& cn = candidates[child];
      cn.box = cb;
      const Vec3 half = 0.5 * cb.extent();
      const Vec3 cc = cb.center();
      for (Index f : tris) {
        const auto& tri = mesh.faces[f];
        if (detail::tri_box_overlap(cc, half, mesh.positions[tri[0]],
                                    mesh.positions[tri[1]],
                                    mesh.positions[tri[2]]))
          cn.triangles.push_back(f);
      }
      if (!cn.triangles.empty() && cn.triangles.size() < tris.size())
        any_shrunk = true;
    }
    if (!any_shrunk) {
      // Splitting made no progress; keep the node as a leaf.
      tree.nodes[work.node].triangles = std::move(tris);
      continue;
    }
    tree.nodes[work.node].leaf = false;
    for (int child = 0; child < 8; ++child) {
      if (candidates[child].triangles.empty()) continue;
      const Index id = static_cast<Index>(tree.nodes.size());
      tree.nodes.push_back(std::move(candidates[child]));
      tree.nodes[work.node].children[child] = id;
      stack.push_back({id, work.depth + 1});
    }
  }
  return tree;
}

struct RayHit {
  Scalar t = 0.0;
  Index face = -1;
  Vec3 point = Vec3::Zero();
};

namespace detail {

inline bool ray_box(const Vec3& origin, const Vec3& dir, const Box3& box,
                    Scalar t_max, Scalar& t_enter) {
  Scalar t0 = 0.0;
  Scalar t1 = t_max;
  for (int i = 0; i < 3; ++i) {
    if (dir[i] == 0.0) {
      if (origin[i] < box.min[i] || origin[i] > box.max[i]) return false;
      continue;
    }
    const Scalar inv = 1.0 / dir[i];
    Scalar near = (box.min[i] - origin[i]) * inv;
    Scalar far = (box.max[i] - origin[i]) * inv;
    if (inv < 0.0) std::swap(near, far);
    t0 = std::max(t0, near);
    t1 = std::min(t1, far);
    if (t0 > t1) return false;
  }
  t_enter = t0;
  return true;
}

inline void ray_intersect_node(const Octree& tree, const TriMesh& mesh,
                               Index node_id, const Vec3& origin,
                               const Vec3& dir, Scalar t_eps, RayHit& best,
                               bool& found) {
  const OctreeNode& node = tree.nodes[node_id];
  if (node.leaf) {
    for (Index f : node.triangles) {
      const auto& tri = mesh.faces[f];
      const auto t = ray_triangle(origin, dir, mesh.positions[tri[0]],
                                  mesh.positions[tri[1]],
                                  mesh.positions[tri[2]]);
      if (!t || *t <= t_eps) continue;
      if (!found || *t < best.t || (*t == best.t && f < best.face)) {
        best.t = *t;
        best.face = f;
        found = true;
      }
    }
    return;
  }
  // Visit children nearest-first so the best t prunes the rest.
  std::array<std::pair<Scalar, Index>, 8> order;
  int n = 0;
  for (Index child : node.children) {
    if (child < 0) continue;
    Scalar t_enter;
    const Scalar limit = found ? best.t : std::numeric_limits<Scalar>::max();
    if (ray_box(origin, dir, tree.nodes[child].box, limit, t_enter))
      order[n++] = {t_enter, child};
  }
  std::sort(order.begin(), order.begin() + n);
  for (int i = 0; i < n; ++i) {
    if (found && order[i].first > best.t) break;
    ray_intersect_node(tree, mesh, order[i].second, origin, dir, t_eps, best,
                       found);
  }
}

}  // namespace detail

/// Nearest intersection with t > t_eps, identical to a scan over all
/// triangles (ties at equal t go to the lower face id).
inline std::optional<RayHit> ray_intersect(const Octree& tree,
                                           const TriMesh& mesh,
                                           const Vec3& origin, const Vec3& dir,
                                           Scalar t_eps = 1e-12) {
  RayHit best;
  bool found = false;
  detail::ray_intersect_node(tree, mesh, 0, origin, dir, t_eps, best, found);
  if (!found) return std::nullopt;
  best.point = origin + best.t * dir;
  return best;
}

struct SurfacePoint {
  Scalar distance = 0.0;
  Index face = -1;
  Vec3 point = Vec3::Zero();
};

namespace detail {

inline void closest_point_node(const Octree& tree, const TriMesh& mesh,
                               Index node_id, const Vec3& p,
                               SurfacePoint& best, Scalar& best_sq) {
  const OctreeNode& node = tree.nodes[node_id];
  if (node.leaf) {
    for (Index f : node.triangles) {
      const auto& tri = mesh.faces[f];
      const Vec3 q = closest_point_on_triangle(p, mesh.positions[tri[0]],
                                               mesh.positions[tri[1]],
                                               mesh.positions[tri[2]]);
      const Scalar d2 = (q - p).squaredNorm();
      if (d2 < best_sq || (d2 == best_sq && f < best.face)) {
        best_sq = d2;
        best.face = f;
        best.point = q;
      }
    }
    return;
  }
  std::array<std::pair<Scalar, Index>, 8> order;
  int n = 0;
  for (Index child : node.children) {
    if (child < 0) continue;
    const Scalar d2 = tree.nodes[child].box.squared_distance(p);
    if (d2 <= best_sq) order[n++] = {d2, child};
  }
  std::sort(order.begin(), order.begin() + n);
  for (int i = 0; i < n; ++i) {
    if (order[i].first > best_sq) break;
    closest_point_node(tree, mesh, order[i].second, p, best, best_sq);
  }
}

}  // namespace detail

/// Closest surface point to p, identical to scanning every triangle.
inline SurfacePoint closest_surface_point(const Octree& tree,
                                          const TriMesh& mesh, const Vec3& p) {
  SurfacePoint best;
  Scalar best_sq = std::numeric_limits<Scalar>::max();
  detail::closest_point_node(tree, mesh, 0, p, best, best_sq);
  best.distance = std::sqrt(best_sq);
  return best;
}

/// Signed distance to a closed mesh: magnitude from the nearest triangle,
/// sign from a 3-ray crossing-parity majority vote.
class MeshSdf {
 public:
  explicit MeshSdf(TriMesh mesh, int max_leaf = 8)
      : mesh_(std::move(mesh)), tree_(build_octree(mesh_, max_leaf)) {}

  const TriMesh& mesh() const { return mesh_; }
  const Octree& octree() const { return tree_; }

  Scalar operator()(const Vec3& p) const {
    const SurfacePoint nearest = closest_surface_point(tree_, mesh_, p);
    int votes = 0;
    for (const Vec3& dir : kProbeDirs) {
      if (crossing_count(p, dir) % 2 == 1) ++votes;
    }
    const Scalar sign = votes >= 2 ? -1.0 : 1.0;
    return sign * nearest.distance;
  }

 private:
  int crossing_count(const Vec3& origin, const Vec3& dir) const {
    int count = 0;
    Scalar t_min = 1e-12;
    for (int guard = 0; guard < 1024; ++guard) {
      const auto hit = ray_intersect(tree_, mesh_, origin, dir, t_min);
      if (!hit) break;
      ++count;
      t_min = hit->t + 1e-9 * (1.0 + std::abs(hit->t));
    }
    return count;
  }

  // Fixed irrational-ish directions keep the probes away from the axis
  // planes of lattice-aligned test meshes.
  static inline const std::array<Vec3, 3> kProbeDirs = {
      Vec3(0.5424962734, 0.7630925077, 0.3512317683).normalized(),
      Vec3(-0.6712843216, 0.2154308412, 0.7092817345).normalized(),
      Vec3(0.1854302671, -0.5907234581, 0.7852139046).normalized()};

  TriMesh mesh_;
  Octree tree_;
};

}  // namespace sculpt
