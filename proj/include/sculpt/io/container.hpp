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

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "sculpt/tetra/tet_grid.hpp"

namespace sculpt {

// Versioned binary container for grids and parameters. Little-endian.
inline constexpr char kContainerMagic[4] = {'S', 'C', 'L', 'P'};
inline constexpr std::uint32_t kContainerVersion = 1;

namespace detail {

template <typename T>
void put_raw(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get_raw(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

}  // namespace detail

/// Saves grid construction parameters plus the DMTet fields. The lattice is
/// rebuilt on load, so only (resolution, bounds, sdf, deform) are stored.
inline void write_dmtet(const TetGrid& grid, const DmtetParams& params,
                        const std::string& path) {
  if (!params.sized_for(grid))
    throw InvalidArgument("write_dmtet: params not sized to grid");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("write_dmtet: cannot open " + path);

  out.write(kContainerMagic, 4);
  detail::put_raw(out, kContainerVersion);
  detail::put_raw(out, static_cast<std::uint32_t>(grid.resolution));
  for (int i = 0; i < 3; ++i) detail::put_raw(out, grid.bounds.min[i]);
  for (int i = 0; i < 3; ++i) detail::put_raw(out, grid.bounds.max[i]);
  detail::put_raw(out, static_cast<std::uint64_t>(params.sdf.size()));
  out.write(reinterpret_cast<const char*>(params.sdf.data()),
            static_cast<std::streamsize>(params.sdf.size() * sizeof(Scalar)));
  for (const Vec3& d : params.deform)
    for (int i = 0; i < 3; ++i) detail::put_raw(out, d[i]);
  if (!out) throw IoError("write_dmtet: write failed " + path);
}

inline std::pair<TetGrid, DmtetParams> read_dmtet(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("read_dmtet: cannot open " + path);

  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kContainerMagic, 4) != 0)
    throw IoError("read_dmtet: bad magic in " + path);
  const auto version = detail::get_raw<std::uint32_t>(in);
  if (version != kContainerVersion)
    throw IoError("read_dmtet: unsupported version in " + path);

  const auto resolution = detail::get_raw<std::uint32_t>(in);
  Box3 bounds;
  for (int i = 0; i < 3; ++i) bounds.min[i] = detail::get_raw<Scalar>(in);
  for (int i = 0; i < 3; ++i) bounds.max[i] = detail::get_raw<Scalar>(in);
  const auto count = detail::get_raw<std::uint64_t>(in);

  TetGrid grid = build_tet_grid(static_cast<int>(resolution), bounds);
  if (count != grid.vertices.size())
    throw IoError("read_dmtet: field size does not match grid in " + path);

  DmtetParams params;
  params.sdf.resize(count);
  in.read(reinterpret_cast<char*>(params.sdf.data()),
          static_cast<std::streamsize>(count * sizeof(Scalar)));
  params.deform.resize(count);
  for (Vec3& d : params.deform)
    for (int i = 0; i < 3; ++i) d[i] = detail::get_raw<Scalar>(in);
  if (!in) throw IoError("read_dmtet: truncated data in " + path);
  return {std::move(grid), std::move(params)};
}

// Identity embedding file: magic "FID0", u32 length, float32 little-endian.
inline constexpr char kIdentityMagic[4] = {'F', 'I', 'D', '0'};

inline void write_identity(const std::vector<Scalar>& identity,
                           const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("write_identity: cannot open " + path);
  out.write(kIdentityMagic, 4);
  detail::put_raw(out, static_cast<std::uint32_t>(identity.size()));
  for (Scalar v : identity) detail::put_raw(out, static_cast<float>(v));
  if (!out) throw IoError("write_identity: write failed " + path);
}

inline std::vector<Scalar> read_identity(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("read_identity: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kIdentityMagic, 4) != 0)
    throw IoError("read_identity: bad magic in " + path);
  const auto length = detail::get_raw<std::uint32_t>(in);
  std::vector<Scalar> identity(length);
  for (std::uint32_t i = 0; i < length; ++i)
    identity[i] = detail::get_raw<float>(in);
  if (!in) throw IoError("read_identity: truncated data in " + path);
  return identity;
}

}  // namespace sculpt
