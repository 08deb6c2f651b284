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
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sculpt/tetra/mesh.hpp"

namespace sculpt {

/// Binary little-endian PLY with double precision vertex data, so
/// export/import round trips are exact.
inline void write_ply(const TriMesh& mesh, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("write_ply: cannot open " + path);

  const bool vn = mesh.has_normals();
  const bool vt = mesh.has_uvs();
  out << "ply\nformat binary_little_endian 1.0\n";
  out << "element vertex " << mesh.positions.size() << "\n";
  out << "property double x\nproperty double y\nproperty double z\n";
  if (vn) out << "property double nx\nproperty double ny\nproperty double nz\n";
  if (vt) out << "property double u\nproperty double v\n";
  out << "element face " << mesh.faces.size() << "\n";
  out << "property list uchar int vertex_indices\n";
  out << "end_header\n";

  const auto put = [&](double v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(double));
  };
  for (std::size_t i = 0; i < mesh.positions.size(); ++i) {
    put(mesh.positions[i].x());
    put(mesh.positions[i].y());
    put(mesh.positions[i].z());
    if (vn) {
      put(mesh.vertex_normals[i].x());
      put(mesh.vertex_normals[i].y());
      put(mesh.vertex_normals[i].z());
    }
    if (vt) {
      put(mesh.uvs[i].x());
      put(mesh.uvs[i].y());
    }
  }
  for (const auto& f : mesh.faces) {
    const std::uint8_t n = 3;
    out.write(reinterpret_cast<const char*>(&n), 1);
    for (int k = 0; k < 3; ++k) {
      const std::int32_t idx = f[k];
      out.write(reinterpret_cast<const char*>(&idx), sizeof(idx));
    }
  }
  if (!out) throw IoError("write_ply: write failed " + path);
}

inline TriMesh read_ply(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("read_ply: cannot open " + path);

  std::string line;
  if (!std::getline(in, line) || line != "ply")
    throw IoError("read_ply: not a PLY file: " + path);

  struct Property {
    std::string type;
    std::string name;
  };
  std::size_t vertex_count = 0, face_count = 0;
  std::vector<Property> vertex_props;
  std::string format;
  std::string element;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "format") {
      ss >> format;
    } else if (tag == "element") {
      std::size_t count;
      ss >> element >> count;
      if (element == "vertex") vertex_count = count;
      if (element == "face") face_count = count;
    } else if (tag == "property" && element == "vertex") {
      Property p;
      ss >> p.type >> p.name;
      vertex_props.push_back(p);
    } else if (tag == "end_header") {
      break;
    }
  }
  if (format != "binary_little_endian")
    throw IoError("read_ply: only binary_little_endian is supported");

  const auto read_scalar = [&](const std::string& type) -> double {
    if (type == "double") {
      double v;
      in.read(reinterpret_cast<char*>(&v), sizeof(v));
      return v;
    }
    if (type == "float" || type == "float32") {
      float v;
      in.read(reinterpret_cast<char*>(&v), sizeof(v));
      return v;
    }
    throw IoError("read_ply: unsupported vertex property type " + type);
  };

  TriMesh mesh;
  mesh.positions.resize(vertex_count, Vec3::Zero());
  bool has_normals = false, has_uvs = false;
  for (const auto& p : vertex_props) {
    if (p.name == "nx") has_normals = true;
    if (p.name == "u" || p.name == "s") has_uvs = true;
  }
  if (has_normals) mesh.vertex_normals.resize(vertex_count, Vec3::Zero());
  if (has_uvs) mesh.uvs.resize(vertex_count, Vec2::Zero());

  for (std::size_t i = 0; i < vertex_count; ++i) {
    for (const auto& p : vertex_props) {
      const double v = read_scalar(p.type);
      if (p.name == "x") mesh.positions[i].x() = v;
      else if (p.name == "y") mesh.positions[i].y() = v;
      else if (p.name == "z") mesh.positions[i].z() = v;
      else if (p.name == "nx") mesh.vertex_normals[i].x() = v;
      else if (p.name == "ny") mesh.vertex_normals[i].y() = v;
      else if (p.name == "nz") mesh.vertex_normals[i].z() = v;
      else if (p.name == "u" || p.name == "s") mesh.uvs[i].x() = v;
      else if (p.name == "v" || p.name == "t") mesh.uvs[i].y() = v;
    }
  }
  if (!in) throw IoError("read_ply: truncated vertex data in " + path);

  for (std::size_t f = 0; f < face_count; ++f) {
    std::uint8_t n = 0;
    in.read(reinterpret_cast<char*>(&n), 1);
    std::vector<std::int32_t> idx(n);
    for (int k = 0; k < n; ++k)
      in.read(reinterpret_cast<char*>(&idx[k]), sizeof(std::int32_t));
    if (!in) throw IoError("read_ply: truncated face data in " + path);
    for (int k = 1; k + 1 < n; ++k)
      mesh.faces.push_back({idx[0], idx[k], idx[k + 1]});
  }
  return mesh;
}

}  // namespace sculpt
