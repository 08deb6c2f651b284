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

// Wire format of the guidance plug-in boundary. A request is a versioned
// binary record: magic, version, a JSON header, and PFM image payloads.
// An external process can serve real diffusion models over this record;
// the engine never links an ML runtime.

#pragma once

#include <json.hpp>

#include <cstdint>
#include <cstring>
#include <map>
#include <string>
#include <vector>

#include "sculpt/guidance/provider.hpp"
#include "sculpt/io/pfm.hpp"

namespace sculpt {

inline constexpr char kWireRequestMagic[4] = {'S', 'G', 'P', 'R'};
inline constexpr char kWireResponseMagic[4] = {'S', 'G', 'R', 'S'};
inline constexpr std::uint32_t kWireVersion = 1;

struct WireRequest {
  std::string op;  // "capabilities" | "predict_epsilon" | "inpaint" | "refine"
  int t = 0;
  bool unconditional = false;
  std::uint64_t seed = 0;
  Camera camera;
  std::string text_tag;
  std::vector<Scalar> identity;
  int schedule_steps = 0;
  Scalar beta_start = 0.0;
  Scalar beta_end = 0.0;
  std::map<std::string, RasterImage> images;
};

struct WireResponse {
  bool ok = false;
  std::string error;
  std::map<std::string, RasterImage> images;
};

namespace detail {

inline void wire_put_u32(std::string& out, std::uint32_t v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.append(buf, 4);
}

inline void wire_put_u64(std::string& out, std::uint64_t v) {
  char buf[8];
  std::memcpy(buf, &v, 8);
  out.append(buf, 8);
}

inline std::uint32_t wire_get_u32(const std::string& in, std::size_t& pos) {
  if (pos + 4 > in.size()) throw IoError("wire record truncated");
  std::uint32_t v;
  std::memcpy(&v, in.data() + pos, 4);
  pos += 4;
  return v;
}

inline std::uint64_t wire_get_u64(const std::string& in, std::size_t& pos) {
  if (pos + 8 > in.size()) throw IoError("wire record truncated");
  std::uint64_t v;
  std::memcpy(&v, in.data() + pos, 8);
  pos += 8;
  return v;
}

inline std::string pack_record(const char magic[4], const nlohmann::json& head,
                               const std::map<std::string, RasterImage>& images) {
  std::string out;
  out.append(magic, 4);
  wire_put_u32(out, kWireVersion);
  const std::string head_str = head.dump();
  wire_put_u32(out, static_cast<std::uint32_t>(head_str.size()));
  out += head_str;
  wire_put_u32(out, static_cast<std::uint32_t>(images.size()));
  for (const auto& [name, image] : images) {
    wire_put_u32(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    const std::string pfm = pfm_to_bytes(image);
    wire_put_u64(out, pfm.size());
    out += pfm;
  }
  return out;
}

inline std::pair<nlohmann::json, std::map<std::string, RasterImage>>
parse_record(const char magic[4], const std::string& bytes) {
  std::size_t pos = 0;
  if (bytes.size() < 4 || std::memcmp(bytes.data(), magic, 4) != 0)
    throw IoError("wire record has a bad magic header");
  pos = 4;
  const std::uint32_t version = wire_get_u32(bytes, pos);
  if (version != kWireVersion)
    throw IoError("wire record version " + std::to_string(version) +
                  " is unsupported");
  const std::uint32_t head_len = wire_get_u32(bytes, pos);
  if (pos + head_len > bytes.size()) throw IoError("wire record truncated");
  nlohmann::json head = nlohmann::json::parse(bytes.substr(pos, head_len));
  pos += head_len;
  std::map<std::string, RasterImage> images;
  const std::uint32_t count = wire_get_u32(bytes, pos);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = wire_get_u32(bytes, pos);
    if (pos + name_len > bytes.size()) throw IoError("wire record truncated");
    const std::string name = bytes.substr(pos, name_len);
    pos += name_len;
    const std::uint64_t pfm_len = wire_get_u64(bytes, pos);
    if (pos + pfm_len > bytes.size()) throw IoError("wire record truncated");
    images[name] = pfm_from_bytes(bytes.substr(pos, pfm_len));
    pos += pfm_len;
  }
  return {std::move(head), std::move(images)};
}

inline nlohmann::json camera_to_json(const Camera& cam) {
  return {{"azimuth", cam.azimuth_deg},   {"elevation", cam.elevation_deg},
          {"distance", cam.distance},     {"fovy", cam.fovy_deg},
          {"width", cam.width},           {"height", cam.height},
          {"look_at", {cam.look_at.x(), cam.look_at.y(), cam.look_at.z()}}};
}

inline Camera camera_from_json(const nlohmann::json& j) {
  Camera cam;
  cam.azimuth_deg = j.at("azimuth").get<Scalar>();
  cam.elevation_deg = j.at("elevation").get<Scalar>();
  cam.distance = j.at("distance").get<Scalar>();
  cam.fovy_deg = j.at("fovy").get<Scalar>();
  cam.width = j.at("width").get<int>();
  cam.height = j.at("height").get<int>();
  const auto& look = j.at("look_at");
  cam.look_at = Vec3(look.at(0).get<Scalar>(), look.at(1).get<Scalar>(),
                     look.at(2).get<Scalar>());
  return cam;
}

}  // namespace detail

inline std::string pack_request(const WireRequest& request) {
  nlohmann::json head{{"op", request.op},
                      {"t", request.t},
                      {"unconditional", request.unconditional},
                      {"seed", request.seed},
                      {"camera", detail::camera_to_json(request.camera)},
                      {"text_tag", request.text_tag},
                      {"identity", request.identity},
                      {"schedule",
                       {{"steps", request.schedule_steps},
                        {"beta_start", request.beta_start},
                        {"beta_end", request.beta_end}}}};
  return detail::pack_record(kWireRequestMagic, head, request.images);
}

inline WireRequest parse_request(const std::string& bytes) {
  auto [head, images] = detail::parse_record(kWireRequestMagic, bytes);
  WireRequest request;
  request.op = head.at("op").get<std::string>();
  request.t = head.at("t").get<int>();
  request.unconditional = head.at("unconditional").get<bool>();
  request.seed = head.at("seed").get<std::uint64_t>();
  request.camera = detail::camera_from_json(head.at("camera"));
  request.text_tag = head.at("text_tag").get<std::string>();
  request.identity = head.at("identity").get<std::vector<Scalar>>();
  const auto& sched = head.at("schedule");
  request.schedule_steps = sched.at("steps").get<int>();
  request.beta_start = sched.at("beta_start").get<Scalar>();
  request.beta_end = sched.at("beta_end").get<Scalar>();
  request.images = std::move(images);
  return request;
}

inline std::string pack_response(const WireResponse& response) {
  nlohmann::json head{{"ok", response.ok}, {"error", response.error}};
  return detail::pack_record(kWireResponseMagic, head, response.images);
}

inline WireResponse parse_response(const std::string& bytes) {
  auto [head, images] = detail::parse_record(kWireResponseMagic, bytes);
  WireResponse response;
  response.ok = head.at("ok").get<bool>();
  response.error = head.at("error").get<std::string>();
  response.images = std::move(images);
  return response;
}

/// Serves a GuidanceProvider over the wire record; the loopback test and
/// any external process wrapping a real model share this dispatch.
inline WireResponse serve_wire_request(const GuidanceProvider& provider,
                                       const WireRequest& request) {
  WireResponse response;
  try {
    const DiffusionSchedule schedule =
        request.schedule_steps > 0
            ? make_schedule(request.schedule_steps, request.beta_start,
                            request.beta_end)
            : make_schedule();
    ConditionBundle conditions;
    conditions.text_tag = request.text_tag;
    conditions.identity = request.identity;
    const auto maybe = [&](const char* name) -> std::optional<RasterImage> {
      const auto it = request.images.find(name);
      if (it == request.images.end()) return std::nullopt;
      return it->second;
    };
    conditions.landmark_image = maybe("landmark");
    conditions.normal_image = maybe("normal");
    conditions.canny_image = maybe("canny");
    conditions.depth_image = maybe("depth");

    if (request.op == "predict_epsilon") {
      response.images["result"] = provider.predict_epsilon(
          request.images.at("x_t"), request.t, request.camera, conditions,
          schedule, request.unconditional);
    } else if (request.op == "inpaint") {
      response.images["result"] =
          provider.inpaint(request.images.at("partial"),
                           request.images.at("known"), request.camera,
                           conditions);
    } else if (request.op == "refine") {
      response.images["result"] =
          provider.refine(request.images.at("x0"), request.t, request.camera,
                          conditions, schedule, request.seed);
    } else {
      throw InvalidArgument("unknown wire op " + request.op);
    }
    response.ok = true;
  } catch (const std::exception& e) {
    response.ok = false;
    response.error = e.what();
    response.images.clear();
  }
  return response;
}

}  // namespace sculpt
