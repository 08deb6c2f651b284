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
#include <limits>

#include "sculpt/core/types.hpp"

namespace sculpt {

inline Scalar sdf_sphere(const Vec3& center, Scalar radius, const Vec3& p) {
  return (p - center).norm() - radius;
}

inline Scalar sdf_capsule(const Vec3& a, const Vec3& b, Scalar radius,
                          const Vec3& p) {
  const Vec3 ab = b - a;
  const Scalar denom = ab.squaredNorm();
  const Scalar t =
      denom > 0.0 ? std::clamp((p - a).dot(ab) / denom, 0.0, 1.0) : 0.0;
  return (p - (a + t * ab)).norm() - radius;
}

namespace detail {

/// Distance to the ellipsoid surface for the candidate where every
/// zero component of q keeps x_i = 0. The Lagrange condition
/// x_i = r_i^2 q_i / (t + r_i^2) with sum (x_i/r_i)^2 = 1 has a unique root
/// in t on (-min r_i^2, inf); found by bisection.
inline Scalar ellipsoid_subspace_distance(const Scalar* r, const Scalar* q,
                                          int n) {
  if (n == 0) return std::numeric_limits<Scalar>::max();

  const auto f_of_t = [&](Scalar t) {
    Scalar f = -1.0;
    for (int i = 0; i < n; ++i) {
      const Scalar term = r[i] * q[i] / (t + r[i] * r[i]);
      f += term * term;
    }
    return f;
  };

  Scalar r2min = r[0] * r[0];
  Scalar s = 0.0;
  for (int i = 0; i < n; ++i) {
    r2min = std::min(r2min, r[i] * r[i]);
    s += r[i] * q[i] * r[i] * q[i];
  }
  Scalar lo = -r2min + std::max(1e-18, 1e-14 * r2min);
  Scalar hi = std::sqrt(s) + 1.0;
  while (f_of_t(hi) > 0.0) hi *= 2.0;
  if (f_of_t(lo) < 0.0) hi = lo;  // q vanishingly close to the axis plane
  for (int iter = 0; iter < 200 && lo < hi; ++iter) {
    const Scalar mid = 0.5 * (lo + hi);
    if (f_of_t(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-17 * (std::abs(lo) + std::abs(hi) + 1.0)) break;
  }
  const Scalar t = 0.5 * (lo + hi);

  Scalar d2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const Scalar xi = r[i] * r[i] * q[i] / (t + r[i] * r[i]);
    d2 += (xi - q[i]) * (xi - q[i]);
  }
  return std::sqrt(d2);
}

/// Distance for the branch t = -r_k^2 where axis k has q_k = 0 but the
/// closest point leaves the q_k = 0 plane. Valid only while all active
/// denominators stay positive and the residual direction is real.
inline Scalar ellipsoid_offaxis_distance(const Scalar* r, const Scalar* q,
                                         int n, Scalar rk) {
  const Scalar t = -rk * rk;
  Scalar rest = 0.0;
  Scalar d2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const Scalar denom = t + r[i] * r[i];
    if (denom <= 0.0) return std::numeric_limits<Scalar>::max();
    const Scalar xi = r[i] * r[i] * q[i] / denom;
    const Scalar u = xi / r[i];
    rest += u * u;
    d2 += (xi - q[i]) * (xi - q[i]);
  }
  if (rest > 1.0) return std::numeric_limits<Scalar>::max();
  d2 += rk * rk * (1.0 - rest);
  return std::sqrt(d2);
}

}  // namespace detail

/// Exact signed distance to an axis-aligned ellipsoid with semi-axes radii.
inline Scalar sdf_ellipsoid(const Vec3& center, const Vec3& radii,
                            const Vec3& p) {
  const Vec3 q = (p - center).cwiseAbs();

  Scalar inside_test = 0.0;
  for (int i = 0; i < 3; ++i) {
    const Scalar v = q[i] / radii[i];
    inside_test += v * v;
  }
  const Scalar sign = inside_test < 1.0 ? -1.0 : 1.0;

  Scalar active_r[3];
  Scalar active_q[3];
  int n_active = 0;
  for (int i = 0; i < 3; ++i) {
    if (q[i] > 0.0) {
      active_r[n_active] = radii[i];
      active_q[n_active] = q[i];
      ++n_active;
    }
  }
  if (n_active == 0) return -radii.minCoeff();  // at the center

  Scalar best = detail::ellipsoid_subspace_distance(active_r, active_q,
                                                    n_active);
  for (int k = 0; k < 3; ++k)
    if (q[k] == 0.0)
      best = std::min(best, detail::ellipsoid_offaxis_distance(
                                active_r, active_q, n_active, radii[k]));

  return sign * best;
}

}  // namespace sculpt
