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

#include <Eigen/SVD>

#include <string>
#include <vector>

#include "sculpt/render/camera.hpp"
#include "sculpt/tetra/octree.hpp"

namespace sculpt {

/// Ordered 3D keypoints; semantics are fixed by index. Seven keypoints are
/// used for alignment by default, the full set for projection.
struct LandmarkSet {
  std::vector<Vec3> points;

  void validate() const {
    for (const Vec3& p : points)
      if (!p.allFinite())
        throw InvalidArgument("LandmarkSet: non-finite coordinates");
  }
};

/// Similarity transform p -> scale * rotation * p + translation.
struct SimTransform {
  Scalar scale = 1.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const {
    return scale * (rotation * p) + translation;
  }
  LandmarkSet apply(const LandmarkSet& set) const {
    LandmarkSet out;
    out.points.reserve(set.points.size());
    for (const Vec3& p : set.points) out.points.push_back(apply(p));
    return out;
  }
};

struct SimilarityFit {
  SimTransform transform;
  Scalar rms_residual = 0.0;
};

/// Least-squares similarity aligning src onto dst (closed form through the
/// SVD of the cross-covariance, with the determinant guard against
/// reflections). Collinear or coincident point sets are rejected.
inline SimilarityFit estimate_similarity_transform(const LandmarkSet& src,
                                                   const LandmarkSet& dst) {
  const std::size_t n = src.points.size();
  if (n != dst.points.size())
    throw InvalidArgument("estimate_similarity_transform: count mismatch");
  if (n < 3)
    throw InvalidArgument(
        "estimate_similarity_transform: need at least 3 points");
  src.validate();
  dst.validate();

  Vec3 mu_src = Vec3::Zero();
  Vec3 mu_dst = Vec3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    mu_src += src.points[i];
    mu_dst += dst.points[i];
  }
  mu_src /= static_cast<Scalar>(n);
  mu_dst /= static_cast<Scalar>(n);

  Mat3 cov = Mat3::Zero();
  Scalar var_src = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 x = src.points[i] - mu_src;
    const Vec3 y = dst.points[i] - mu_dst;
    cov += y * x.transpose();
    var_src += x.squaredNorm();
  }
  cov /= static_cast<Scalar>(n);
  var_src /= static_cast<Scalar>(n);

  if (var_src < 1e-18)
    throw DegenerateInput(
        "estimate_similarity_transform: source points are coincident");

  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 d = svd.singularValues();
  if (d[1] <= 1e-9 * d[0])
    throw DegenerateInput(
        "estimate_similarity_transform: points are collinear");

  Vec3 s_diag = Vec3::Ones();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0)
    s_diag[2] = -1.0;

  SimilarityFit fit;
  fit.transform.rotation =
      svd.matrixU() * s_diag.asDiagonal() * svd.matrixV().transpose();
  fit.transform.scale = d.dot(s_diag) / var_src;
  fit.transform.translation =
      mu_dst - fit.transform.scale * (fit.transform.rotation * mu_src);

  Scalar sq = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    sq += (fit.transform.apply(src.points[i]) - dst.points[i]).squaredNorm();
  fit.rms_residual = std::sqrt(sq / static_cast<Scalar>(n));
  return fit;
}

/// Aligns a landmark set to a mesh: casts one ray per keypoint from the
/// camera position through the keypoint (the projection ray through its
/// image-plane position), intersects the mesh to get target keypoints,
/// estimates the source-to-target similarity, and transforms every landmark.
inline LandmarkSet align_landmarks_to_mesh(
    const LandmarkSet& landmarks, const std::vector<int>& keypoint_indices,
    const Camera& camera, const TriMesh& mesh, const Octree* octree = nullptr,
    SimilarityFit* fit_out = nullptr) {
  if (mesh.empty())
    throw InvalidArgument("align_landmarks_to_mesh: empty mesh");
  if (keypoint_indices.size() < 3)
    throw InvalidArgument("align_landmarks_to_mesh: need >= 3 keypoints");

  Octree local;
  if (!octree) {
    local = build_octree(mesh);
    octree = &local;
  }

  const Vec3 origin = camera.position();
  LandmarkSet src, dst;
  for (int idx : keypoint_indices) {
    if (idx < 0 || idx >= static_cast<int>(landmarks.points.size()))
      throw InvalidArgument("align_landmarks_to_mesh: keypoint out of range");
    const Vec3& kp = landmarks.points[idx];
    const Vec3 dir = (kp - origin).normalized();
    const auto hit = ray_intersect(*octree, mesh, origin, dir);
    if (!hit)
      throw AlignmentFailure(
          "align_landmarks_to_mesh: keypoint ray " + std::to_string(idx) +
              " misses the mesh",
          idx);
    src.points.push_back(kp);
    dst.points.push_back(hit->point);
  }

  const SimilarityFit fit = estimate_similarity_transform(src, dst);
  if (fit_out) *fit_out = fit;
  return fit.transform.apply(landmarks);
}

}  // namespace sculpt
