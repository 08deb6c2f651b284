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

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "sculpt/core/image.hpp"

namespace sculpt {

/// Writes a portable float map ("Pf" for 1 channel, "PF" for 3). Scale -1
/// marks little-endian samples; rows are stored bottom to top.
inline void write_pfm(const RasterImage& image, const std::string& path) {
  if (image.channels != 1 && image.channels != 3)
    throw InvalidArgument("write_pfm: only 1- or 3-channel images");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("write_pfm: cannot open " + path);
  out << (image.channels == 3 ? "PF" : "Pf") << "\n"
      << image.width << " " << image.height << "\n"
      << "-1.0\n";
  std::vector<float> row(static_cast<std::size_t>(image.width) *
                         image.channels);
  for (int y = image.height - 1; y >= 0; --y) {
    for (int x = 0; x < image.width; ++x)
      for (int c = 0; c < image.channels; ++c)
        row[static_cast<std::size_t>(x) * image.channels + c] =
            static_cast<float>(image.at(x, y, c));
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!out) throw IoError("write_pfm: write failed for " + path);
}

inline RasterImage read_pfm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("read_pfm: cannot open " + path);

  std::string magic;
  int width = 0, height = 0;
  double scale = 0.0;
  in >> magic >> width >> height >> scale;
  if (!in || (magic != "PF" && magic != "Pf") || width <= 0 || height <= 0)
    throw IoError("read_pfm: malformed header in " + path);
  in.get();  // single whitespace after the scale line

  const int channels = magic == "PF" ? 3 : 1;
  const bool little_endian = scale < 0.0;
  RasterImage image(width, height, channels);
  std::vector<float> row(static_cast<std::size_t>(width) * channels);
  for (int y = height - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(float)));
    if (!in) throw IoError("read_pfm: truncated data in " + path);
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < channels; ++c) {
        float v = row[static_cast<std::size_t>(x) * channels + c];
        if (!little_endian) {
          unsigned char* b = reinterpret_cast<unsigned char*>(&v);
          std::swap(b[0], b[3]);
          std::swap(b[1], b[2]);
        }
        image.at(x, y, c) = v;
      }
    }
  }
  return image;
}

/// Serializes to the PFM byte layout in memory; the provider wire format
/// carries images this way.
inline std::string pfm_to_bytes(const RasterImage& image) {
  if (image.channels != 1 && image.channels != 3)
    throw InvalidArgument("pfm_to_bytes: only 1- or 3-channel images");
  std::ostringstream out(std::ios::binary);
  out << (image.channels == 3 ? "PF" : "Pf") << "\n"
      << image.width << " " << image.height << "\n"
      << "-1.0\n";
  for (int y = image.height - 1; y >= 0; --y)
    for (int x = 0; x < image.width; ++x)
      for (int c = 0; c < image.channels; ++c) {
        const float v = static_cast<float>(image.at(x, y, c));
        out.write(reinterpret_cast<const char*>(&v), sizeof(float));
      }
  return out.str();
}

inline RasterImage pfm_from_bytes(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  std::string magic;
  int width = 0, height = 0;
  double scale = 0.0;
  in >> magic >> width >> height >> scale;
  if (!in || (magic != "PF" && magic != "Pf") || width <= 0 || height <= 0)
    throw IoError("pfm_from_bytes: malformed header");
  in.get();
  const int channels = magic == "PF" ? 3 : 1;
  RasterImage image(width, height, channels);
  for (int y = height - 1; y >= 0; --y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < channels; ++c) {
        float v = 0.0f;
        in.read(reinterpret_cast<char*>(&v), sizeof(float));
        if (!in) throw IoError("pfm_from_bytes: truncated data");
        image.at(x, y, c) = v;
      }
  return image;
}

}  // namespace sculpt
