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

#include <cmath>
#include <cstddef>
#include <vector>

#include "sculpt/core/error.hpp"
#include "sculpt/core/types.hpp"

namespace sculpt {

/// Dense scalar image. Linear color space for RGB data, world units for
/// depth/normal data. Row 0 is the top of the image.
struct RasterImage {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<Scalar> data;

  RasterImage() = default;
  RasterImage(int w, int h, int c, Scalar fill = 0.0)
      : width(w), height(h), channels(c),
        data(static_cast<std::size_t>(w) * h * c, fill) {
    if (w <= 0 || h <= 0 || c <= 0)
      throw InvalidArgument("RasterImage dimensions must be positive");
  }

  Scalar& at(int x, int y, int c = 0) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  Scalar at(int x, int y, int c = 0) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }

  bool same_shape(const RasterImage& other) const {
    return width == other.width && height == other.height &&
           channels == other.channels;
  }
  bool empty() const { return data.empty(); }
  std::size_t size() const { return data.size(); }

  void fill(Scalar v) { std::fill(data.begin(), data.end(), v); }

  bool all_finite() const {
    for (Scalar v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

inline void require_same_shape(const RasterImage& a, const RasterImage& b,
                               const char* where) {
  if (!a.same_shape(b))
    throw InvalidArgument(std::string(where) + ": image shape mismatch");
}

/// Mean squared error over all samples, or over pixels where mask > 0.5.
inline Scalar mse(const RasterImage& a, const RasterImage& b,
                  const RasterImage* mask = nullptr) {
  require_same_shape(a, b, "mse");
  Scalar sum = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < a.height; ++y) {
    for (int x = 0; x < a.width; ++x) {
      if (mask && mask->at(x, y) <= 0.5) continue;
      for (int c = 0; c < a.channels; ++c) {
        const Scalar d = a.at(x, y, c) - b.at(x, y, c);
        sum += d * d;
        ++n;
      }
    }
  }
  if (n == 0) throw InvalidArgument("mse: empty mask");
  return sum / static_cast<Scalar>(n);
}

}  // namespace sculpt
