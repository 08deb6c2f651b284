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

#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "sculpt/tetra/marching_tets.hpp"
#include "sculpt/tetra/octree.hpp"
#include "sculpt/tetra/sdf_primitives.hpp"
#include "sculpt/tetra/shapes.hpp"
#include "sculpt/tetra/tet_grid.hpp"

using namespace sculpt;

namespace {

Box3 unit_box() {
  Box3 b;
  b.min = Vec3(-1, -1, -1);
  b.max = Vec3(1, 1, 1);
  return b;
}

DmtetParams sphere_params(const TetGrid& grid, Scalar radius) {
  DmtetParams params = DmtetParams::zeros(grid);
  for (std::size_t i = 0; i < grid.vertices.size(); ++i)
    params.sdf[i] = sdf_sphere(Vec3::Zero(), radius, grid.vertices[i]);
  return params;
}

}  // namespace

TEST_CASE("tet grid counts follow the 6-tets-per-cube lattice") {
  const TetGrid grid = build_tet_grid(2, unit_box());
  CHECK(grid.vertices.size() == 27);
  CHECK(grid.tets.size() == 48);
  CHECK(tet_grid_vertex_count(2) == 27);
  CHECK(tet_grid_tet_count(2) == 48);
  // Paper-scale default, counted without building.
  CHECK(tet_grid_vertex_count(512) == 513LL * 513LL * 513LL);
  CHECK(tet_grid_tet_count(512) == 6LL * 512LL * 512LL * 512LL);
}

TEST_CASE("tet grid rejects resolution below 2") {
  CHECK_THROWS_AS(build_tet_grid(1, unit_box()), InvalidArgument);
  CHECK_THROWS_AS(build_tet_grid(0, unit_box()), InvalidArgument);
  Box3 degenerate;
  degenerate.min = Vec3(0, 0, 0);
  degenerate.max = Vec3(1, 0, 1);
  CHECK_THROWS_AS(build_tet_grid(4, degenerate), InvalidArgument);
}

TEST_CASE("tet grid construction is deterministic with positive volumes") {
  const TetGrid a = build_tet_grid(5, unit_box());
  const TetGrid b = build_tet_grid(5, unit_box());
  REQUIRE(a.tets.size() == b.tets.size());
  for (std::size_t i = 0; i < a.tets.size(); ++i) CHECK(a.tets[i] == b.tets[i]);
  for (const auto& tet : a.tets) {
    const Vec3& p0 = a.vertices[tet[0]];
    const Scalar vol = (a.vertices[tet[1]] - p0)
                           .cross(a.vertices[tet[2]] - p0)
                           .dot(a.vertices[tet[3]] - p0);
    CHECK(vol > 0.0);
  }
}

TEST_CASE("tet grid faces are conforming between neighbouring cells") {
  // Every interior triangular face must be shared by exactly two tets.
  const TetGrid grid = build_tet_grid(3, unit_box());
  std::map<std::array<Index, 3>, int> faces;
  for (const auto& tet : grid.tets) {
    static constexpr int kFaces[4][3] = {
        {0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
    for (const auto& f : kFaces) {
      std::array<Index, 3> key = {tet[f[0]], tet[f[1]], tet[f[2]]};
      std::sort(key.begin(), key.end());
      faces[key]++;
    }
  }
  for (const auto& [face, count] : faces) {
    CHECK(count <= 2);
    CHECK(count >= 1);
  }
}

TEST_CASE("sdf primitives: sphere and capsule closed forms") {
  CHECK(sdf_sphere(Vec3::Zero(), 1.0, Vec3(0, 0, 0)) == Catch::Approx(-1.0));
  CHECK(sdf_sphere(Vec3::Zero(), 1.0, Vec3(2, 0, 0)) == Catch::Approx(1.0));
  CHECK(sdf_capsule(Vec3(-1, 0, 0), Vec3(1, 0, 0), 0.5, Vec3(0, 2, 0)) ==
        Catch::Approx(1.5));
  CHECK(sdf_capsule(Vec3(-1, 0, 0), Vec3(1, 0, 0), 0.5, Vec3(3, 0, 0)) ==
        Catch::Approx(1.5));
}

TEST_CASE("sdf ellipsoid: surface point and sign") {
  CHECK(std::abs(sdf_ellipsoid(Vec3::Zero(), Vec3(1, 2, 1), Vec3(0, 2, 0))) <
        1e-9);
  CHECK(sdf_ellipsoid(Vec3::Zero(), Vec3(1, 2, 1), Vec3(0, 0, 0)) < 0.0);
  CHECK(sdf_ellipsoid(Vec3::Zero(), Vec3(1, 2, 1), Vec3(3, 0, 0)) ==
        Catch::Approx(2.0));
}

TEST_CASE("sdf ellipsoid matches dense surface sampling") {
  const Vec3 radii(1.0, 2.0, 0.7);
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    Vec3 p(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3));
    if (trial % 5 == 0) p.x() = 0.0;  // closest point may leave the plane
    if (trial % 7 == 0) p.y() = 0.0;

    // Oracle: dense parametric sampling of the surface.
    Scalar best = std::numeric_limits<Scalar>::max();
    const int n = 400;
    for (int i = 0; i <= n; ++i) {
      const Scalar theta = kPi * i / n;
      for (int j = 0; j < 2 * n; ++j) {
        const Scalar phi = kPi * j / n;
        const Vec3 s(radii.x() * std::sin(theta) * std::cos(phi),
                     radii.y() * std::sin(theta) * std::sin(phi),
                     radii.z() * std::cos(theta));
        best = std::min(best, (s - p).norm());
      }
    }
    const Scalar inside =
        p.x() * p.x() / (radii.x() * radii.x()) +
        p.y() * p.y() / (radii.y() * radii.y()) +
        p.z() * p.z() / (radii.z() * radii.z());
    const Scalar expected = (inside < 1.0 ? -1.0 : 1.0) * best;
    const Scalar got = sdf_ellipsoid(Vec3::Zero(), radii, p);
    CHECK(std::abs(got - expected) < 2e-3);  // oracle is sampling-limited
  }
}

TEST_CASE("marching tets: single tet emits the midpoint triangle") {
  TetGrid grid;
  grid.resolution = 1;
  grid.bounds.min = Vec3(0, 0, 0);
  grid.bounds.max = Vec3(1, 1, 1);
  grid.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
  grid.tets = {{0, 1, 2, 3}};
  DmtetParams params;
  params.sdf = {-1.0, 1.0, 1.0, 1.0};
  params.deform.assign(4, Vec3::Zero());

  const TriMesh mesh = marching_tetrahedra(grid, params);
  REQUIRE(mesh.faces.size() == 1);
  REQUIRE(mesh.positions.size() == 3);
  std::vector<Vec3> expected = {Vec3(0.5, 0, 0), Vec3(0, 0.5, 0),
                                Vec3(0, 0, 0.5)};
  for (const Vec3& e : expected) {
    bool found = false;
    for (const Vec3& p : mesh.positions)
      if ((p - e).norm() < 1e-12) found = true;
    CHECK(found);
  }
  // Outward = away from the inside vertex at the origin.
  const Vec3 n = face_normal_scaled(mesh, 0);
  CHECK(n.dot(Vec3(1, 1, 1)) > 0.0);
}

TEST_CASE("marching tets: uniform sign gives an empty mesh") {
  const TetGrid grid = build_tet_grid(3, unit_box());
  DmtetParams params = DmtetParams::zeros(grid);
  std::fill(params.sdf.begin(), params.sdf.end(), 1.0);
  CHECK(marching_tetrahedra(grid, params).faces.empty());
  std::fill(params.sdf.begin(), params.sdf.end(), -1.0);
  CHECK(marching_tetrahedra(grid, params).faces.empty());
}

TEST_CASE("marching tets: res-32 sphere is watertight with Euler char 2") {
  const TetGrid grid = build_tet_grid(32, unit_box());
  const DmtetParams params = sphere_params(grid, 0.7);
  const TriMesh mesh = marching_tetrahedra(grid, params);

  REQUIRE(!mesh.empty());
  CHECK(testing::is_watertight(mesh));
  CHECK(testing::euler_characteristic(mesh) == 2);

  // Chamfer against the analytic sphere, both directions.
  const Scalar cell = grid.cell_edge();
  Scalar worst_mesh_to_sphere = 0.0;
  for (const Vec3& p : mesh.positions)
    worst_mesh_to_sphere =
        std::max(worst_mesh_to_sphere, std::abs(p.norm() - 0.7));
  CHECK(worst_mesh_to_sphere < 2.0 * cell);

  const Octree tree = build_octree(mesh);
  Rng rng(11);
  Scalar worst_sphere_to_mesh = 0.0;
  for (int i = 0; i < 500; ++i) {
    Vec3 dir(rng.normal(), rng.normal(), rng.normal());
    dir.normalize();
    const SurfacePoint sp = closest_surface_point(tree, mesh, 0.7 * dir);
    worst_sphere_to_mesh = std::max(worst_sphere_to_mesh, sp.distance);
  }
  CHECK(worst_sphere_to_mesh < 2.0 * cell);
}

TEST_CASE("marching tets: outward orientation on the sphere") {
  const TetGrid grid = build_tet_grid(16, unit_box());
  const DmtetParams params = sphere_params(grid, 0.6);
  const TriMesh mesh = marching_tetrahedra(grid, params);
  for (Index f = 0; f < static_cast<Index>(mesh.faces.size()); ++f) {
    const auto& tri = mesh.faces[f];
    const Vec3 centroid = (mesh.positions[tri[0]] + mesh.positions[tri[1]] +
                           mesh.positions[tri[2]]) /
                          3.0;
    CHECK(face_normal_scaled(mesh, f).dot(centroid) > 0.0);
  }
}

TEST_CASE("marching tets: every vertex is a zero crossing of the sdf") {
  const TetGrid grid = build_tet_grid(12, unit_box());
  DmtetParams params = sphere_params(grid, 0.65);
  Rng rng(3);
  const Scalar limit = grid.deform_limit();
  for (Vec3& d : params.deform)
    d = 0.8 * limit *
        Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1))
            .normalized() *
        rng.uniform();
  const MtResult result = marching_tetrahedra_with_backward(grid, params);
  REQUIRE(result.backward.vertices.size() == result.mesh.positions.size());
  for (std::size_t v = 0; v < result.backward.vertices.size(); ++v) {
    const auto& rec = result.backward.vertices[v];
    const Scalar interp =
        (1.0 - rec.t) * params.sdf[rec.grid_a] + rec.t * params.sdf[rec.grid_b];
    CHECK(std::abs(interp) < 1e-6);
    const Vec3 pa = grid.vertices[rec.grid_a] + params.deform[rec.grid_a];
    const Vec3 pb = grid.vertices[rec.grid_b] + params.deform[rec.grid_b];
    CHECK((result.mesh.positions[v] - (pa + rec.t * (pb - pa))).norm() < 1e-12);
  }
}

TEST_CASE("marching tets: watertight on a random smooth field") {
  const TetGrid grid = build_tet_grid(10, unit_box());
  DmtetParams params = DmtetParams::zeros(grid);
  // Sum of a few gaussian bumps minus a threshold; smooth and sign-mixed.
  const std::vector<Vec3> centers = {Vec3(0.2, 0.1, -0.1), Vec3(-0.3, 0.2, 0.2),
                                     Vec3(0.0, -0.25, 0.1)};
  for (std::size_t i = 0; i < grid.vertices.size(); ++i) {
    Scalar v = -0.4;
    for (const Vec3& c : centers)
      v += 0.5 * std::exp(-(grid.vertices[i] - c).squaredNorm() / 0.08);
    params.sdf[i] = -v;  // inside where the bumps dominate
  }
  const TriMesh mesh = marching_tetrahedra(grid, params);
  REQUIRE(!mesh.empty());
  CHECK(testing::is_watertight(mesh));
}

TEST_CASE("marching tets backward matches finite differences") {
  const TetGrid grid = build_tet_grid(6, unit_box());
  DmtetParams params = sphere_params(grid, 0.62);
  Rng rng(17);
  for (Vec3& d : params.deform)
    d = 0.3 * grid.deform_limit() *
        Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));

  const MtResult base = marching_tetrahedra_with_backward(grid, params);
  REQUIRE(!base.mesh.empty());

  // Loss: sum of dot(w_v, position_v) with fixed random weights.
  std::vector<Vec3> weights(base.mesh.positions.size());
  for (Vec3& w : weights)
    w = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));

  const auto loss_of = [&](const DmtetParams& p) {
    const TriMesh m = marching_tetrahedra(grid, p);
    REQUIRE(m.positions.size() == weights.size());
    Scalar loss = 0.0;
    for (std::size_t v = 0; v < m.positions.size(); ++v)
      loss += weights[v].dot(m.positions[v]);
    return loss;
  };

  DmtetGrads grads = DmtetGrads::zeros(grid);
  mt_backward_positions(base.backward, weights, grads);

  const Scalar h = 1e-6;
  int checked_sdf = 0;
  for (std::size_t i = 0; i < grid.vertices.size() && checked_sdf < 24; ++i) {
    if (grads.sdf[i] == 0.0) continue;
    DmtetParams plus = params, minus = params;
    plus.sdf[i] += h;
    minus.sdf[i] -= h;
    const Scalar fd = (loss_of(plus) - loss_of(minus)) / (2 * h);
    CHECK(std::abs(fd - grads.sdf[i]) <
          1e-4 * std::max<Scalar>(1.0, std::abs(fd)));
    ++checked_sdf;
  }
  REQUIRE(checked_sdf > 0);

  int checked_deform = 0;
  for (std::size_t i = 0; i < grid.vertices.size() && checked_deform < 8; ++i) {
    if (grads.deform[i].norm() == 0.0) continue;
    for (int axis = 0; axis < 3; ++axis) {
      DmtetParams plus = params, minus = params;
      plus.deform[i][axis] += h;
      minus.deform[i][axis] -= h;
      const Scalar fd = (loss_of(plus) - loss_of(minus)) / (2 * h);
      CHECK(std::abs(fd - grads.deform[i][axis]) <
            1e-4 * std::max<Scalar>(1.0, std::abs(fd)));
    }
    ++checked_deform;
  }
  REQUIRE(checked_deform > 0);
}

TEST_CASE("vertex normals: regular tetrahedron by hand") {
  TriMesh mesh;
  mesh.positions = {Vec3(1, 1, 1), Vec3(1, -1, -1), Vec3(-1, 1, -1),
                    Vec3(-1, -1, 1)};
  mesh.faces = {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}};
  // Fix orientation outward.
  for (auto& f : mesh.faces) {
    const Vec3 c = (mesh.positions[f[0]] + mesh.positions[f[1]] +
                    mesh.positions[f[2]]) /
                   3.0;
    const Vec3 n = (mesh.positions[f[1]] - mesh.positions[f[0]])
                       .cross(mesh.positions[f[2]] - mesh.positions[f[0]]);
    if (n.dot(c) < 0.0) std::swap(f[1], f[2]);
  }
  const TriMesh with_normals = compute_vertex_normals(mesh);
  for (std::size_t v = 0; v < mesh.positions.size(); ++v) {
    // Hand oracle: sum of the three incident face normals, normalized.
    Vec3 sum = Vec3::Zero();
    for (Index f = 0; f < 4; ++f) {
      const auto& tri = mesh.faces[f];
      if (tri[0] != static_cast<Index>(v) && tri[1] != static_cast<Index>(v) &&
          tri[2] != static_cast<Index>(v))
        continue;
      sum += face_normal_scaled(mesh, f);
    }
    CHECK((with_normals.vertex_normals[v] - sum.normalized()).norm() < 1e-12);
    // Regular tetrahedron: vertex normals are radial.
    CHECK((with_normals.vertex_normals[v] -
           mesh.positions[v].normalized())
              .norm() < 1e-12);
  }
}

TEST_CASE("vertex normals: flat quad and icosphere radial bound") {
  const TriMesh quad = make_quad(1.0);
  for (const Vec3& n : quad.vertex_normals)
    CHECK((n - Vec3(0, 0, 1)).norm() < 1e-12);

  const TriMesh sphere = make_icosphere(1.0, 3);
  for (std::size_t v = 0; v < sphere.positions.size(); ++v) {
    const Scalar cosang =
        sphere.vertex_normals[v].dot(sphere.positions[v].normalized());
    CHECK(std::acos(std::clamp(cosang, -1.0, 1.0)) < deg_to_rad(5.0));
  }
}

TEST_CASE("vertex normals: isolated vertex flagged as zero") {
  TriMesh mesh = make_quad(1.0);
  mesh.positions.push_back(Vec3(5, 5, 5));
  const TriMesh out = compute_vertex_normals(mesh);
  CHECK(out.vertex_normals.back() == Vec3::Zero());
}

TEST_CASE("vertex normals backward matches finite differences") {
  TriMesh mesh = make_icosphere(1.0, 1);
  Rng rng(23);
  std::vector<Vec3> weights(mesh.positions.size());
  for (Vec3& w : weights)
    w = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));

  const auto loss_of = [&](const TriMesh& m) {
    const TriMesh withn = compute_vertex_normals(m);
    Scalar loss = 0.0;
    for (std::size_t v = 0; v < withn.positions.size(); ++v)
      loss += weights[v].dot(withn.vertex_normals[v]);
    return loss;
  };

  std::vector<Vec3> grad_pos(mesh.positions.size(), Vec3::Zero());
  vertex_normals_backward(mesh, weights, grad_pos);

  const Scalar h = 1e-6;
  for (std::size_t v = 0; v < 6; ++v) {
    for (int axis = 0; axis < 3; ++axis) {
      TriMesh plus = mesh, minus = mesh;
      plus.positions[v][axis] += h;
      minus.positions[v][axis] -= h;
      const Scalar fd = (loss_of(plus) - loss_of(minus)) / (2 * h);
      CHECK(std::abs(fd - grad_pos[v][axis]) <
            1e-5 * std::max<Scalar>(1.0, std::abs(fd)));
    }
  }
}

TEST_CASE("deform clamp keeps parameters inside the limit") {
  const TetGrid grid = build_tet_grid(4, unit_box());
  DmtetParams params = DmtetParams::zeros(grid);
  params.deform[10] = Vec3(1, 1, 1);
  clamp_deform(params, grid);
  CHECK(params.deform[10].norm() <= grid.deform_limit() * (1 + 1e-12));
  CHECK_NOTHROW(validate_params(params, grid));
  params.sdf[3] = std::numeric_limits<Scalar>::quiet_NaN();
  CHECK_THROWS_AS(validate_params(params, grid), InvalidArgument);
}
