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
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "sculpt/tetra/mesh.hpp"

namespace sculpt {

/// Wavefront OBJ export. Uses %.9g so reruns are byte-identical.
inline void write_obj(const TriMesh& mesh, const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw IoError("write_obj: cannot open " + path);

  const bool vn = mesh.has_normals();
  const bool vt = mesh.has_uvs();
  for (const Vec3& p : mesh.positions)
    std::fprintf(fp, "v %.9g %.9g %.9g\n", p.x(), p.y(), p.z());
  if (vt)
    for (const Vec2& t : mesh.uvs)
      std::fprintf(fp, "vt %.9g %.9g\n", t.x(), t.y());
  if (vn)
    for (const Vec3& nrm : mesh.vertex_normals)
      std::fprintf(fp, "vn %.9g %.9g %.9g\n", nrm.x(), nrm.y(), nrm.z());

  for (const auto& f : mesh.faces) {
    const long a = f[0] + 1, b = f[1] + 1, c = f[2] + 1;
    if (vt && vn)
      std::fprintf(fp, "f %ld/%ld/%ld %ld/%ld/%ld %ld/%ld/%ld\n", a, a, a, b,
                   b, b, c, c, c);
    else if (vt)
      std::fprintf(fp, "f %ld/%ld %ld/%ld %ld/%ld\n", a, a, b, b, c, c);
    else if (vn)
      std::fprintf(fp, "f %ld//%ld %ld//%ld %ld//%ld\n", a, a, b, b, c, c);
    else
      std::fprintf(fp, "f %ld %ld %ld\n", a, b, c);
  }
  if (std::fclose(fp) != 0) throw IoError("write_obj: write failed " + path);
}

namespace detail {

struct ObjCorner {
  int v = 0;
  int vt = 0;
  int vn = 0;
};

inline ObjCorner parse_obj_corner(const std::string& token) {
  ObjCorner corner;
  int fields[3] = {0, 0, 0};
  int field = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= token.size(); ++i) {
    if (i == token.size() || token[i] == '/') {
      if (i > start && field < 3)
        fields[field] = std::stoi(token.substr(start, i - start));
      ++field;
      start = i + 1;
    }
  }
  corner.v = fields[0];
  corner.vt = fields[1];
  corner.vn = fields[2];
  return corner;
}

}  // namespace detail

/// OBJ import. Polygons are fan-triangulated; corners with distinct
/// position/uv/normal combinations are split into unique vertices.
inline TriMesh read_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("read_obj: cannot open " + path);

  std::vector<Vec3> positions;
  std::vector<Vec2> uvs;
  std::vector<Vec3> normals;
  std::vector<std::vector<detail::ObjCorner>> polygons;

  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "v") {
      Vec3 p;
      ss >> p.x() >> p.y() >> p.z();
      positions.push_back(p);
    } else if (tag == "vt") {
      Vec2 t;
      ss >> t.x() >> t.y();
      uvs.push_back(t);
    } else if (tag == "vn") {
      Vec3 n;
      ss >> n.x() >> n.y() >> n.z();
      normals.push_back(n);
    } else if (tag == "f") {
      std::vector<detail::ObjCorner> poly;
      std::string token;
      while (ss >> token) poly.push_back(detail::parse_obj_corner(token));
      if (poly.size() >= 3) polygons.push_back(std::move(poly));
    }
  }

  const auto resolve = [](int idx, std::size_t count) -> int {
    if (idx > 0) return idx - 1;
    if (idx < 0) return static_cast<int>(count) + idx;
    return -1;
  };

  TriMesh mesh;
  std::map<std::tuple<int, int, int>, Index> corner_map;
  const auto corner_vertex = [&](const detail::ObjCorner& c) -> Index {
    const int v = resolve(c.v, positions.size());
    const int vt = resolve(c.vt, uvs.size());
    const int vn = resolve(c.vn, normals.size());
    if (v < 0 || v >= static_cast<int>(positions.size()))
      throw IoError("read_obj: vertex index out of range");
    const auto key = std::make_tuple(v, vt, vn);
    auto it = corner_map.find(key);
    if (it != corner_map.end()) return it->second;
    const Index id = static_cast<Index>(mesh.positions.size());
    mesh.positions.push_back(positions[v]);
    if (vt >= 0) {
      mesh.uvs.resize(mesh.positions.size(), Vec2::Zero());
      mesh.uvs[id] = uvs[vt];
    }
    if (vn >= 0) {
      mesh.vertex_normals.resize(mesh.positions.size(), Vec3::Zero());
      mesh.vertex_normals[id] = normals[vn];
    }
    corner_map.emplace(key, id);
    return id;
  };

  for (const auto& poly : polygons) {
    for (std::size_t k = 1; k + 1 < poly.size(); ++k)
      mesh.faces.push_back({corner_vertex(poly[0]), corner_vertex(poly[k]),
                            corner_vertex(poly[k + 1])});
  }
  if (!mesh.uvs.empty()) mesh.uvs.resize(mesh.positions.size(), Vec2::Zero());
  if (!mesh.vertex_normals.empty())
    mesh.vertex_normals.resize(mesh.positions.size(), Vec3::Zero());
  return mesh;
}

}  // namespace sculpt
