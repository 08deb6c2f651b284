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
#include "sculpt/guidance/oracle.hpp"
#include "sculpt/texture/atlas.hpp"
#include "sculpt/texture/perceptual.hpp"
#include "sculpt/texture/texture_stage.hpp"
#include "sculpt/texture/texture_state.hpp"
#include "sculpt/tetra/shapes.hpp"

using namespace sculpt;

namespace {

TriMesh make_cube() {
  TriMesh mesh;
  mesh.positions = {{-1, -1, -1}, {1, -1, -1}, {1, 1, -1}, {-1, 1, -1},
                    {-1, -1, 1},  {1, -1, 1},  {1, 1, 1},  {-1, 1, 1}};
  mesh.faces = {{0, 2, 1}, {0, 3, 2}, {4, 5, 6}, {4, 6, 7},
                {0, 1, 5}, {0, 5, 4}, {2, 3, 7}, {2, 7, 6},
                {1, 2, 6}, {1, 6, 5}, {3, 0, 4}, {3, 4, 7}};
  return compute_vertex_normals(mesh);
}

/// Smooth world-position paint for ground-truth textures.
Vec3 paint(const Vec3& p) {
  return Vec3(0.5 + 0.4 * std::sin(3.0 * p.x()),
              0.5 + 0.4 * std::cos(2.0 * p.y() + 1.0),
              0.5 + 0.4 * std::sin(2.5 * p.z() + 0.5));
}

struct SphereScene {
  TriMesh mesh;
  TexelTable table;
  RasterImage gt_texture;
};

SphereScene make_sphere_scene(int atlas_size, int subdiv = 3) {
  SphereScene scene;
  const UnwrapResult unwrapped =
      unwrap_uv(make_icosphere(0.7, subdiv), atlas_size, 2);
  scene.mesh = unwrapped.mesh;
  scene.table = build_texel_table(scene.mesh, atlas_size);
  scene.gt_texture = RasterImage(atlas_size, atlas_size, 3, 0.5);
  for (int y = 0; y < atlas_size; ++y)
    for (int x = 0; x < atlas_size; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * atlas_size + x;
      if (scene.table.face[i] < 0) continue;
      const Vec3 color = paint(scene.table.position[i]);
      for (int c = 0; c < 3; ++c)
        scene.gt_texture.data[i * 3 + c] = color[c];
    }
  return scene;
}

Camera stage_camera(Scalar az, Scalar el, int size) {
  return camera_from_spherical(az, el, 3, 40, Vec3::Zero(), size, size);
}

Scalar psnr_over_covered(const TextureState& state,
                         const RasterImage& gt_texture) {
  Scalar mse = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < state.coverage.data.size(); ++i) {
    if (state.coverage.data[i] <= 0.5) continue;
    for (int c = 0; c < 3; ++c) {
      const Scalar d = state.texels.data[i * 3 + c] - gt_texture.data[i * 3 + c];
      mse += d * d;
      ++n;
    }
  }
  REQUIRE(n > 0);
  mse /= static_cast<Scalar>(n);
  return mse <= 0.0 ? 99.0 : std::min(99.0, 10.0 * std::log10(1.0 / mse));
}

}  // namespace

TEST_CASE("unwrap: single triangle fills the atlas minus the gutter") {
  TriMesh tri;
  tri.positions = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  tri.faces = {{0, 1, 2}};
  tri = compute_vertex_normals(tri);

  const UnwrapResult result = unwrap_uv(tri, 128, 4);
  REQUIRE(result.atlas.charts.size() == 1);
  const UvChart& chart = result.atlas.charts[0];
  CHECK(std::max(chart.px_w, chart.px_h) >= 126);  // spans atlas minus gutter
  CHECK(result.mesh.has_uvs());
  for (const Vec2& uv : result.mesh.uvs) {
    CHECK(uv.x() >= 0.0);
    CHECK(uv.x() <= 1.0);
    CHECK(uv.y() >= 0.0);
    CHECK(uv.y() <= 1.0);
  }
}

TEST_CASE("unwrap: cube produces at most 6 disjoint charts") {
  const TriMesh cube = make_cube();
  const UnwrapResult result = unwrap_uv(cube, 256, 4);
  CHECK(result.atlas.charts.size() <= 6);

  // Every face mapped.
  for (int chart : result.atlas.face_chart) CHECK(chart >= 0);

  // Chart boxes pairwise disjoint.
  const auto& charts = result.atlas.charts;
  for (std::size_t a = 0; a < charts.size(); ++a)
    for (std::size_t b = a + 1; b < charts.size(); ++b) {
      const bool overlap = charts[a].px_x < charts[b].px_x + charts[b].px_w &&
                           charts[b].px_x < charts[a].px_x + charts[a].px_w &&
                           charts[a].px_y < charts[b].px_y + charts[b].px_h &&
                           charts[b].px_y < charts[a].px_y + charts[a].px_h;
      CHECK(!overlap);
    }

  // Exhaustive texel check: each occupied texel's uv triangle stays inside
  // its own chart box content (gutter inset).
  const TexelTable table = build_texel_table(result.mesh, 256);
  CHECK(table.occupied > 0);
  std::size_t face_cursor = 0;
  for (std::size_t c = 0; c < charts.size(); ++c) {
    for (std::size_t k = 0; k < charts[c].faces.size(); ++k, ++face_cursor) {
      const auto& tri = result.mesh.faces[face_cursor];
      for (Index v : tri) {
        const Scalar px = result.mesh.uvs[v].x() * 256;
        const Scalar py = (1.0 - result.mesh.uvs[v].y()) * 256;
        CHECK(px >= charts[c].px_x + result.atlas.gutter - 1e-6);
        CHECK(px <= charts[c].px_x + charts[c].px_w - result.atlas.gutter + 1e-6);
        CHECK(py >= charts[c].px_y + result.atlas.gutter - 1e-6);
        CHECK(py <= charts[c].px_y + charts[c].px_h - result.atlas.gutter + 1e-6);
      }
    }
  }
}

TEST_CASE("unwrap: icosphere coverage audit") {
  const UnwrapResult result = unwrap_uv(make_icosphere(0.7, 2), 256, 4);
  for (int chart : result.atlas.face_chart) CHECK(chart >= 0);
  long box_area = 0;
  for (const UvChart& chart : result.atlas.charts)
    box_area += static_cast<long>(chart.px_w) * chart.px_h;
  CHECK(box_area <= 256L * 256L);
  CHECK(result.mesh.faces.size() == 320);  // counts preserved by splitting
}

TEST_CASE("bake/render round trip reaches 35 dB on covered pixels") {
  const SphereScene scene = make_sphere_scene(256);
  const Camera cam = stage_camera(0, 0, 128);

  // Source image: the oracle's own render of the gt texture, which is what
  // a perfect bake should reproduce.
  SyntheticTargetOracle oracle(scene.mesh, OracleMode::textured,
                               scene.gt_texture);
  const RasterImage source = oracle.target(cam);

  TextureState state = TextureState::create(256);
  state = bake_view(state, source, cam, scene.mesh, scene.table);
  CHECK(state.covered_count() > 1000);

  auto [render, known] = render_partial(state, cam, scene.mesh, scene.table);
  Scalar mse = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < 128; ++y)
    for (int x = 0; x < 128; ++x) {
      if (known.at(x, y) <= 0.5) continue;
      for (int c = 0; c < 3; ++c) {
        const Scalar d = render.at(x, y, c) - source.at(x, y, c);
        mse += d * d;
        ++n;
      }
    }
  REQUIRE(n > 0);
  const Scalar psnr = 10.0 * std::log10(1.0 / (mse / n));
  INFO("round-trip psnr " << psnr);
  CHECK(psnr > 35.0);
}

TEST_CASE("bake: back-facing texels stay untouched; rebake is idempotent") {
  const SphereScene scene = make_sphere_scene(128);
  const Camera cam = stage_camera(0, 0, 96);
  SyntheticTargetOracle oracle(scene.mesh, OracleMode::textured,
                               scene.gt_texture);
  const RasterImage source = oracle.target(cam);

  TextureState state = TextureState::create(128);
  state = bake_view(state, source, cam, scene.mesh, scene.table);

  const Vec3 cam_pos = cam.position();
  for (std::size_t i = 0; i < scene.table.face.size(); ++i) {
    if (scene.table.face[i] < 0) continue;
    const Vec3 to_cam = (cam_pos - scene.table.position[i]).normalized();
    if (scene.table.normal[i].dot(to_cam) < 0.0)
      CHECK(state.coverage.data[i] == 0.0);
  }

  const TextureState again =
      bake_view(state, source, cam, scene.mesh, scene.table);
  CHECK(again.texels.data == state.texels.data);
  CHECK(again.coverage.data == state.coverage.data);
}

TEST_CASE("bake: every written texel passes the ray visibility oracle") {
  const SphereScene scene = make_sphere_scene(128);
  const Camera cam = stage_camera(35, 10, 96);
  SyntheticTargetOracle oracle(scene.mesh, OracleMode::textured,
                               scene.gt_texture);
  const RasterImage source = oracle.target(cam);

  TextureState state = TextureState::create(128);
  state = bake_view(state, source, cam, scene.mesh, scene.table);

  const Octree tree = build_octree(scene.mesh);
  const Vec3 origin = cam.position();
  for (std::size_t i = 0; i < scene.table.face.size(); ++i) {
    if (state.coverage.data[i] <= 0.5) continue;
    const Vec3& p = scene.table.position[i];
    const Scalar dist = (p - origin).norm();
    const auto hit =
        ray_intersect(tree, scene.mesh, origin, (p - origin).normalized());
    REQUIRE(hit);
    // No occluder strictly closer than the tolerance band.
    CHECK(hit->t > dist * (1.0 - 0.05));
  }
}

TEST_CASE("render_partial: known mask cases") {
  const SphereScene scene = make_sphere_scene(128);
  const Camera cam = stage_camera(0, 0, 96);

  // Empty coverage: known mask all zero, unknown pixels mid-gray.
  TextureState empty = TextureState::create(128);
  auto [img0, known0] = render_partial(empty, cam, scene.mesh, scene.table);
  for (Scalar v : known0.data) CHECK(v == 0.0);
  const GBuffer gbuf = rasterize(scene.mesh, cam);
  for (int y = 0; y < 96; ++y)
    for (int x = 0; x < 96; ++x)
      if (gbuf.covered(x, y)) CHECK(img0.at(x, y, 0) == kGuidanceBackground);

  // Fully covered texture: known mask equals the render mask.
  TextureState full = TextureState::create(128);
  full.texels = scene.gt_texture;
  for (std::size_t i = 0; i < scene.table.face.size(); ++i)
    full.coverage.data[i] = scene.table.face[i] >= 0 ? 1.0 : 0.0;
  auto [img1, known1] = render_partial(full, cam, scene.mesh, scene.table);
  const RasterImage mask = shade_mask(gbuf);
  for (std::size_t i = 0; i < mask.data.size(); ++i)
    CHECK(known1.data[i] == mask.data[i]);
}

TEST_CASE("render_partial: bake seam follows the analytic terminator") {
  const SphereScene scene = make_sphere_scene(256);
  const Camera front = stage_camera(0, 0, 128);
  SyntheticTargetOracle oracle(scene.mesh, OracleMode::textured,
                               scene.gt_texture);

  TextureState state = TextureState::create(256);
  state = bake_view(state, oracle.target(front), front, scene.mesh,
                    scene.table);

  const Camera side = stage_camera(90, 0, 128);
  const GBuffer gbuf = rasterize(scene.mesh, side);
  auto [img, known] = render_partial(state, side, scene.mesh, scene.table,
                                     &gbuf);

  const Vec3 front_pos = front.position();
  const Scalar graze = deg_to_rad(75.0);
  int checked = 0;
  for (int y = 0; y < 128; ++y) {
    for (int x = 0; x < 128; ++x) {
      const std::size_t i = gbuf.index(x, y);
      if (gbuf.face[i] < 0) continue;
      const auto& tri = scene.mesh.faces[gbuf.face[i]];
      const Vec3& b = gbuf.bary[i];
      const Vec3 p = b[0] * scene.mesh.positions[tri[0]] +
                     b[1] * scene.mesh.positions[tri[1]] +
                     b[2] * scene.mesh.positions[tri[2]];
      const Vec3 n = p.normalized();  // analytic sphere normal
      const Scalar angle = std::acos(
          std::clamp(n.dot((front_pos - p).normalized()), -1.0, 1.0));
      // Skip a band around the terminator (angle threshold + bilinear
      // erosion, a few texels wide).
      if (std::abs(angle - graze) < deg_to_rad(6.0)) continue;
      CHECK(known.at(x, y) == (angle < graze ? 1.0 : 0.0));
      ++checked;
    }
  }
  REQUIRE(checked > 1000);
}

TEST_CASE("blend: exact select per texel and coverage monotonicity") {
  Rng rng(7);
  TextureState previous = TextureState::create(16);
  TextureState candidate = TextureState::create(16);
  for (Scalar& v : previous.texels.data) v = rng.uniform();
  for (Scalar& v : candidate.texels.data) v = rng.uniform();
  for (std::size_t i = 0; i < candidate.coverage.data.size(); ++i)
    candidate.coverage.data[i] = rng.uniform() < 0.6 ? 1.0 : 0.0;

  SECTION("previous fully covered: output equals previous bit-exactly") {
    previous.coverage.fill(1.0);
    const TextureState blended = blend_texture(previous, candidate);
    CHECK(blended.texels.data == previous.texels.data);
    CHECK(blended.coverage.data == previous.coverage.data);
  }

  SECTION("previous empty: output equals the candidate bit-exactly") {
    previous.coverage.fill(0.0);
    const TextureState blended = blend_texture(previous, candidate);
    CHECK(blended.texels.data == candidate.texels.data);
    CHECK(blended.coverage.data == candidate.coverage.data);
  }

  SECTION("checkerboard mask: texels partition exactly between sources") {
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 16; ++x)
        previous.coverage.at(x, y) = (x + y) % 2 == 0 ? 1.0 : 0.0;
    const TextureState blended = blend_texture(previous, candidate);
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 16; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * 16 + x;
        const bool keep = (x + y) % 2 == 0;
        for (int c = 0; c < 3; ++c)
          CHECK(blended.texels.data[i * 3 + c] ==
                (keep ? previous.texels.data[i * 3 + c]
                      : candidate.texels.data[i * 3 + c]));
        // Coverage never decreases.
        CHECK(blended.coverage.data[i] >= previous.coverage.data[i]);
      }
  }
}

TEST_CASE("perceptual loss: zero cases and blur monotonicity") {
  Rng rng(11);
  RasterImage a(48, 48, 3);
  for (int y = 0; y < 48; ++y)
    for (int x = 0; x < 48; ++x)
      for (int c = 0; c < 3; ++c)
        a.at(x, y, c) = 0.5 + 0.3 * std::sin(0.3 * x + c) *
                                  std::cos(0.25 * y - c);

  CHECK(perceptual_loss(a, a) == 0.0);

  RasterImage offset = a;
  for (Scalar& v : offset.data) v += 0.17;
  CHECK(perceptual_loss(a, offset) == Catch::Approx(0.0).margin(1e-12));

  Scalar prev = 0.0;
  for (Scalar sigma : {1.0, 2.0, 4.0}) {
    const RasterImage blurred = [&] {
      RasterImage out = a;
      for (int c = 0; c < 3; ++c) {
        RasterImage channel(48, 48, 1);
        for (int y = 0; y < 48; ++y)
          for (int x = 0; x < 48; ++x) channel.at(x, y) = a.at(x, y, c);
        const RasterImage s = detail::gaussian_blur(channel, sigma);
        for (int y = 0; y < 48; ++y)
          for (int x = 0; x < 48; ++x) out.at(x, y, c) = s.at(x, y);
      }
      return out;
    }();
    const Scalar loss = perceptual_loss(a, blurred);
    CHECK(loss > prev);
    prev = loss;
  }
}

TEST_CASE("perceptual loss gradient matches finite differences") {
  Rng rng(13);
  RasterImage a(20, 20, 3);
  RasterImage b(20, 20, 3);
  for (Scalar& v : a.data) v = rng.uniform();
  for (Scalar& v : b.data) v = rng.uniform();

  RasterImage grad;
  perceptual_loss(a, b, &grad);
  const Scalar h = 1e-7;
  Rng pick(17);
  for (int trial = 0; trial < 40; ++trial) {
    const int x = pick.uniform_int(0, 19);
    const int y = pick.uniform_int(0, 19);
    const int c = pick.uniform_int(0, 2);
    RasterImage plus = a, minus = a;
    plus.at(x, y, c) += h;
    minus.at(x, y, c) -= h;
    const Scalar fd =
        (perceptual_loss(plus, b) - perceptual_loss(minus, b)) / (2 * h);
    CHECK(std::abs(fd - grad.at(x, y, c)) < 1e-4);
  }
}

TEST_CASE("refine_step: ground-truth texture is a fixed point") {
  const SphereScene scene = make_sphere_scene(128);
  SyntheticTargetOracle oracle(scene.mesh, OracleMode::textured,
                               scene.gt_texture);
  const DiffusionSchedule schedule = make_schedule();

  TextureStageConfig config;
  config.atlas_size = 128;
  config.render_width = 96;
  config.render_height = 96;
  config.refine_steps = 1;

  TextureState state = TextureState::create(128);
  state.texels = scene.gt_texture;
  for (std::size_t i = 0; i < scene.table.face.size(); ++i)
    state.coverage.data[i] = scene.table.face[i] >= 0 ? 1.0 : 0.0;
  const RasterImage before = state.texels;

  TextureRefineInputs inputs;
  inputs.reference_camera = stage_camera(0, 0, 96);
  inputs.reference_image = oracle.target(inputs.reference_camera);

  Rng rng(19);
  AdamState adam(state.texels.data.size());
  const RefineMetrics metrics =
      refine_step(state, scene.mesh, scene.table, oracle, inputs, schedule,
                  config, rng, adam, 3);  // step 3: a reference draw
  CHECK(metrics.used_reference);
  CHECK(metrics.loss_mse < 1e-18);
  CHECK(metrics.loss_ref < 1e-18);
  CHECK(state.texels.data == before.data);
}

TEST_CASE("refine_step: noisy texture descends toward the ground truth") {
  const SphereScene scene = make_sphere_scene(128);
  SyntheticTargetOracle oracle(scene.mesh, OracleMode::textured,
                               scene.gt_texture);
  const DiffusionSchedule schedule = make_schedule();

  TextureStageConfig config;
  config.atlas_size = 128;
  config.render_width = 96;
  config.render_height = 96;
  config.lr_texels = 3e-2;

  TextureState state = TextureState::create(128);
  state.texels = scene.gt_texture;
  Rng noise(23);
  for (std::size_t i = 0; i < scene.table.face.size(); ++i) {
    state.coverage.data[i] = scene.table.face[i] >= 0 ? 1.0 : 0.0;
    if (scene.table.face[i] >= 0)
      for (int c = 0; c < 3; ++c)
        state.texels.data[i * 3 + c] = std::clamp(
            state.texels.data[i * 3 + c] + noise.uniform(-0.1, 0.1), 0.0, 1.0);
  }

  TextureRefineInputs inputs;
  inputs.reference_camera = stage_camera(0, 0, 96);
  inputs.reference_image = oracle.target(inputs.reference_camera);

  const Scalar before = psnr_over_covered(state, scene.gt_texture);
  Rng rng(29);
  AdamState adam(state.texels.data.size());
  for (int step = 0; step < 120; ++step)
    refine_step(state, scene.mesh, scene.table, oracle, inputs, schedule,
                config, rng, adam, step);
  const Scalar after = psnr_over_covered(state, scene.gt_texture);
  INFO("psnr before " << before << " after " << after);
  CHECK(after > before + 3.0);
}

TEST_CASE("run_texture_stage: trajectory of length 1 is the reference bake") {
  const SphereScene scene = make_sphere_scene(128);
  SyntheticTargetOracle oracle(scene.mesh, OracleMode::textured,
                               scene.gt_texture);
  const DiffusionSchedule schedule = make_schedule();
  const Camera ref_cam = stage_camera(0, 0, 96);
  const RasterImage ref_image = oracle.target(ref_cam);

  TextureStageConfig config;
  config.atlas_size = 128;
  config.render_width = 96;
  config.render_height = 96;
  config.trajectory_azimuths_deg = {};
  config.include_top_camera = false;
  config.refine_steps = 0;

  TextureRefineInputs inputs;
  inputs.reference_camera = ref_cam;
  inputs.reference_image = ref_image;

  const TextureStageResult result =
      run_texture_stage(scene.mesh, scene.table, ref_image, ref_cam, oracle,
                        inputs, schedule, config);
  CHECK(result.trajectory.cameras.size() == 1);

  TextureState direct = TextureState::create(128);
  BakeSettings settings;
  settings.grazing_angle_deg = config.grazing_angle_deg;
  direct = bake_view(direct, ref_image, ref_cam, scene.mesh, scene.table,
                     settings);
  CHECK(result.state.texels.data == direct.texels.data);
  CHECK(result.state.coverage.data == direct.coverage.data);
}

TEST_CASE("run_texture_stage: oracle end-to-end reaches coverage and psnr") {
  const SphereScene scene = make_sphere_scene(192);
  SyntheticTargetOracle oracle(scene.mesh, OracleMode::textured,
                               scene.gt_texture, /*blur_sigma=*/1.0);
  const DiffusionSchedule schedule = make_schedule();
  const Camera ref_cam = stage_camera(0, 0, 96);
  const RasterImage ref_image = oracle.target(ref_cam);

  TextureStageConfig config;
  config.atlas_size = 192;
  config.render_width = 96;
  config.render_height = 96;
  config.refine_steps = 60;
  config.lr_texels = 3e-2;
  config.seed = 31;

  TextureRefineInputs inputs;
  inputs.reference_camera = ref_cam;
  inputs.reference_image = ref_image;

  const TextureStageResult result =
      run_texture_stage(scene.mesh, scene.table, ref_image, ref_cam, oracle,
                        inputs, schedule, config);

  const Scalar coverage_fraction =
      static_cast<Scalar>(result.state.covered_count()) /
      static_cast<Scalar>(result.occupied_texels);
  INFO("coverage fraction " << coverage_fraction);
  CHECK(coverage_fraction >= 0.95);

  const Scalar psnr = psnr_over_covered(result.state, scene.gt_texture);
  INFO("texture psnr " << psnr);
  CHECK(psnr > 20.0);  // the acceptance run uses the full refine budget
}
