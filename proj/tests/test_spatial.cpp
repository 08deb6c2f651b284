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
#include "sculpt/tetra/landmarks.hpp"
#include "sculpt/tetra/octree.hpp"
#include "sculpt/tetra/sdf_primitives.hpp"
#include "sculpt/tetra/shapes.hpp"

using namespace sculpt;

TEST_CASE("octree: single triangle lives in a single leaf") {
  TriMesh mesh;
  mesh.positions = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  mesh.faces = {{0, 1, 2}};
  const Octree tree = build_octree(mesh, 8);
  REQUIRE(tree.nodes.size() == 1);
  CHECK(tree.root().leaf);
  CHECK(tree.root().triangles.size() == 1);
}

TEST_CASE("octree: rejects empty meshes and max_leaf below 1") {
  TriMesh empty;
  CHECK_THROWS_AS(build_octree(empty), InvalidArgument);
  const TriMesh sphere = make_icosphere(1.0, 1);
  CHECK_THROWS_AS(build_octree(sphere, 0), InvalidArgument);
}

TEST_CASE("octree: every icosphere face appears in a leaf that overlaps it") {
  const TriMesh mesh = make_icosphere(1.0, 3);  // 1280 faces
  REQUIRE(mesh.faces.size() == 1280);
  const Octree tree = build_octree(mesh, 8);

  std::vector<bool> present(mesh.faces.size(), false);
  Box3 leaf_union;
  for (const auto& node : tree.nodes) {
    if (!node.leaf) continue;
    leaf_union.expand(node.box);
    for (Index f : node.triangles) {
      present[f] = true;
      // The leaf box must actually overlap the triangle.
      const auto& tri = mesh.faces[f];
      CHECK(detail::tri_box_overlap(node.box.center(), 0.5 * node.box.extent(),
                                    mesh.positions[tri[0]],
                                    mesh.positions[tri[1]],
                                    mesh.positions[tri[2]]));
    }
  }
  for (bool p : present) CHECK(p);
  const Box3 mesh_box = mesh.bounds();
  CHECK((leaf_union.min.array() <= mesh_box.min.array()).all());
  CHECK((leaf_union.max.array() >= mesh_box.max.array()).all());
}

TEST_CASE("ray intersect: analytic sphere hit and miss") {
  const TriMesh mesh = make_icosphere(1.0, 3);
  const Octree tree = build_octree(mesh);
  const auto hit =
      ray_intersect(tree, mesh, Vec3(0, 0, 3), Vec3(0, 0, -1));
  REQUIRE(hit);
  CHECK(std::abs(hit->t - 2.0) < 0.01);  // within one face-chord of the sphere

  CHECK(!ray_intersect(tree, mesh, Vec3(0, 0, 3), Vec3(0, 0, 1)));
}

TEST_CASE("ray intersect equals brute force on 1000 random rays") {
  const TriMesh mesh = make_icosphere(1.0, 3);
  const Octree tree = build_octree(mesh);
  Rng rng(41);
  int hits = 0;
  for (int i = 0; i < 1000; ++i) {
    const Vec3 origin(rng.uniform(-2.5, 2.5), rng.uniform(-2.5, 2.5),
                      rng.uniform(-2.5, 2.5));
    // Aim at a jittered point near the mesh so most rays hit.
    const Vec3 target(rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2),
                      rng.uniform(-1.2, 1.2));
    Vec3 dir = target - origin;
    if (dir.norm() < 1e-9) dir = Vec3(1, 0, 0);
    dir.normalize();

    const auto fast = ray_intersect(tree, mesh, origin, dir);
    const auto oracle = testing::oracle_ray_mesh(mesh, origin, dir);
    REQUIRE(fast.has_value() == oracle.has_value());
    if (fast) {
      CHECK(fast->face == oracle->face);
      CHECK(std::abs(fast->t - oracle->t) < 1e-9);
      ++hits;
    }
  }
  CHECK(hits > 500);  // sanity: the ray set actually exercises the mesh
}

TEST_CASE("closest surface point equals brute force") {
  const TriMesh mesh = make_icosphere(1.0, 2);
  const Octree tree = build_octree(mesh);
  Rng rng(43);
  for (int i = 0; i < 300; ++i) {
    const Vec3 p(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
    const SurfacePoint fast = closest_surface_point(tree, mesh, p);
    Scalar best = std::numeric_limits<Scalar>::max();
    for (const auto& tri : mesh.faces) {
      const Vec3 q = detail::closest_point_on_triangle(
          p, mesh.positions[tri[0]], mesh.positions[tri[1]],
          mesh.positions[tri[2]]);
      best = std::min(best, (q - p).norm());
    }
    CHECK(std::abs(fast.distance - best) < 1e-12);
  }
}

TEST_CASE("mesh-derived sdf: sign by parity, magnitude by nearest triangle") {
  const MeshSdf sdf(make_icosphere(1.0, 3));
  CHECK(sdf(Vec3(0, 0, 0)) < -0.9);
  CHECK(sdf(Vec3(2, 0, 0)) > 0.9);
  CHECK(std::abs(sdf(Vec3(0.5, 0, 0)) + 0.5) < 0.02);
  CHECK(std::abs(sdf(Vec3(1.5, 0.2, -0.1)) -
                 sdf_sphere(Vec3::Zero(), 1.0, Vec3(1.5, 0.2, -0.1))) < 0.02);
}

TEST_CASE("similarity transform: identity on equal sets") {
  LandmarkSet pts;
  pts.points = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1),
                Vec3(1, 1, 0), Vec3(0.3, -0.6, 0.2), Vec3(-0.8, 0.1, 0.9)};
  const SimilarityFit fit = estimate_similarity_transform(pts, pts);
  CHECK(std::abs(fit.transform.scale - 1.0) < 1e-12);
  CHECK((fit.transform.rotation - Mat3::Identity()).norm() < 1e-12);
  CHECK(fit.transform.translation.norm() < 1e-12);
  CHECK(fit.rms_residual < 1e-12);
}

TEST_CASE("similarity transform: recovers a known (s, R, t) to 1e-6") {
  Rng rng(51);
  for (int trial = 0; trial < 20; ++trial) {
    const Mat3 rot = testing::random_rotation(rng);
    const Scalar scale = rng.uniform(0.3, 3.0);
    const Vec3 trans(rng.uniform(-2, 2), rng.uniform(-2, 2),
                     rng.uniform(-2, 2));

    LandmarkSet src;
    for (int i = 0; i < 7; ++i)
      src.points.push_back(
          Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)));
    LandmarkSet dst;
    for (const Vec3& p : src.points)
      dst.points.push_back(scale * (rot * p) + trans);

    const SimilarityFit fit = estimate_similarity_transform(src, dst);
    CHECK(std::abs(fit.transform.scale - scale) < 1e-6);
    CHECK((fit.transform.rotation - rot).norm() < 1e-6);
    CHECK((fit.transform.translation - trans).norm() < 1e-6);
    CHECK(fit.rms_residual < 1e-9);

    // Orthonormality with positive determinant.
    CHECK((fit.transform.rotation.transpose() * fit.transform.rotation -
           Mat3::Identity())
              .norm() < 1e-9);
    CHECK(fit.transform.rotation.determinant() > 0.0);
  }
}

TEST_CASE("similarity transform: least squares beats nearby perturbations") {
  Rng rng(57);
  LandmarkSet src, dst;
  for (int i = 0; i < 7; ++i) {
    src.points.push_back(
        Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)));
    dst.points.push_back(
        src.points.back() +
        0.1 * Vec3(rng.normal(), rng.normal(), rng.normal()));  // noisy match
  }
  const SimilarityFit fit = estimate_similarity_transform(src, dst);

  const auto sq_residual = [&](const SimTransform& t) {
    Scalar sq = 0.0;
    for (std::size_t i = 0; i < src.points.size(); ++i)
      sq += (t.apply(src.points[i]) - dst.points[i]).squaredNorm();
    return sq;
  };
  const Scalar base = sq_residual(fit.transform);

  // Grid perturbations of +-1% in scale, rotation angle, and translation.
  for (int ds = -1; ds <= 1; ++ds) {
    for (int axis = 0; axis < 3; ++axis) {
      for (int da = -1; da <= 1; ++da) {
        for (int dt = -1; dt <= 1; ++dt) {
          if (ds == 0 && da == 0 && dt == 0) continue;
          SimTransform t = fit.transform;
          t.scale *= 1.0 + 0.01 * ds;
          t.rotation =
              (Eigen::AngleAxis<Scalar>(0.01 * da, Vec3::Unit(axis)) *
               t.rotation)
                  .eval();
          t.translation[axis] += 0.01 * dt;
          CHECK(sq_residual(t) >= base - 1e-12);
        }
      }
    }
  }
}

TEST_CASE("similarity transform: degenerate configurations are rejected") {
  LandmarkSet collinear;
  collinear.points = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0)};
  CHECK_THROWS_AS(estimate_similarity_transform(collinear, collinear),
                  DegenerateInput);

  LandmarkSet coincident;
  coincident.points = {Vec3(1, 1, 1), Vec3(1, 1, 1), Vec3(1, 1, 1)};
  CHECK_THROWS_AS(estimate_similarity_transform(coincident, coincident),
                  DegenerateInput);

  LandmarkSet two;
  two.points = {Vec3(0, 0, 0), Vec3(1, 0, 0)};
  CHECK_THROWS_AS(estimate_similarity_transform(two, two), InvalidArgument);
}

TEST_CASE("landmark alignment: identity when landmarks lie on the mesh") {
  const TriMesh mesh = make_icosphere(1.0, 3);
  const Camera cam = camera_from_spherical(0, 0, 3, 40, Vec3::Zero(), 64, 64);

  // Put keypoints on the sphere along camera rays: intersect rays first.
  const Octree tree = build_octree(mesh);
  LandmarkSet landmarks;
  std::vector<int> indices;
  Rng rng(61);
  for (int i = 0; i < 7; ++i) {
    const Vec3 target(rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4), 0.0);
    const Vec3 dir = (target - cam.position()).normalized();
    const auto hit = ray_intersect(tree, mesh, cam.position(), dir);
    REQUIRE(hit);
    landmarks.points.push_back(hit->point);
    indices.push_back(i);
  }

  const LandmarkSet aligned =
      align_landmarks_to_mesh(landmarks, indices, cam, mesh, &tree);
  for (std::size_t i = 0; i < landmarks.points.size(); ++i)
    CHECK((aligned.points[i] - landmarks.points[i]).norm() < 1e-6);
}

TEST_CASE("landmark alignment: recovers a 2x scaled mesh") {
  const TriMesh small = make_icosphere(1.0, 3);
  const Camera cam = camera_from_spherical(0, 0, 6, 40, Vec3::Zero(), 64, 64);
  const Vec3 origin = cam.position();

  // Big mesh = small mesh scaled 2x about the camera position, so every
  // camera ray meets it at exactly twice the landmark depth.
  TriMesh big = small;
  for (Vec3& p : big.positions) p = origin + 2.0 * (p - origin);

  const Octree small_tree = build_octree(small);
  LandmarkSet landmarks;
  std::vector<int> indices;
  Rng rng(67);
  for (int i = 0; i < 7; ++i) {
    const Vec3 probe(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), 0.0);
    const Vec3 dir = (probe - origin).normalized();
    const auto hit = ray_intersect(small_tree, small, origin, dir);
    REQUIRE(hit);
    landmarks.points.push_back(hit->point);
    indices.push_back(i);
  }

  SimilarityFit fit;
  const LandmarkSet aligned = align_landmarks_to_mesh(
      landmarks, indices, cam, big, nullptr, &fit);
  CHECK(std::abs(fit.transform.scale - 2.0) < 1e-6);
  CHECK(fit.rms_residual < 1e-9);
  for (std::size_t i = 0; i < landmarks.points.size(); ++i)
    CHECK((aligned.points[i] - (origin + 2.0 * (landmarks.points[i] - origin)))
              .norm() < 1e-6);
}

TEST_CASE("landmark alignment: all rays missing names the keypoint") {
  const TriMesh mesh = make_icosphere(0.5, 2);
  // Camera looks away from the mesh: landmarks behind the camera.
  const Camera cam = camera_from_spherical(0, 0, 3, 40, Vec3::Zero(), 64, 64);
  LandmarkSet landmarks;
  std::vector<int> indices = {0, 1, 2};
  landmarks.points = {Vec3(10, 10, 10), Vec3(11, 10, 10), Vec3(10, 11, 10)};
  try {
    align_landmarks_to_mesh(landmarks, indices, cam, mesh);
    FAIL("expected AlignmentFailure");
  } catch (const AlignmentFailure& e) {
    CHECK(e.keypoint_index == 0);
  }
}
