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

#include <httplib.h>

#include <memory>
#include <string>

#include "sculpt/guidance/wire.hpp"

namespace sculpt {

/// Guidance provider backed by an external process speaking the wire
/// record over HTTP. POST /v1/guidance with a request record; the body of
/// the reply is a response record. GET /v1/capabilities returns JSON caps.
class ExternalProvider : public GuidanceProvider {
 public:
  ExternalProvider(std::string host, int port, int timeout_seconds = 60)
      : host_(std::move(host)), port_(port), timeout_seconds_(timeout_seconds) {
    fetch_capabilities();
  }

  ProviderCaps capabilities() const override { return caps_; }

  RasterImage predict_epsilon(const RasterImage& x_t, int t,
                              const Camera& camera,
                              const ConditionBundle& conditions,
                              const DiffusionSchedule& schedule,
                              bool unconditional = false) const override {
    WireRequest request =
        base_request("predict_epsilon", camera, conditions, &schedule);
    request.t = t;
    request.unconditional = unconditional;
    request.images["x_t"] = x_t;
    return round_trip(request);
  }

  RasterImage inpaint(const RasterImage& partial,
                      const RasterImage& known_mask, const Camera& camera,
                      const ConditionBundle& conditions) const override {
    WireRequest request =
        base_request("inpaint", camera, conditions, nullptr);
    request.images["partial"] = partial;
    request.images["known"] = known_mask;
    return round_trip(request);
  }

  RasterImage refine(const RasterImage& x0, int t, const Camera& camera,
                     const ConditionBundle& conditions,
                     const DiffusionSchedule& schedule,
                     std::uint64_t seed) const override {
    WireRequest request =
        base_request("refine", camera, conditions, &schedule);
    request.t = t;
    request.seed = seed;
    request.images["x0"] = x0;
    return round_trip(request);
  }

 private:
  WireRequest base_request(const char* op, const Camera& camera,
                           const ConditionBundle& conditions,
                           const DiffusionSchedule* schedule) const {
    WireRequest request;
    request.op = op;
    request.camera = camera;
    request.text_tag = conditions.text_tag;
    request.identity = conditions.identity;
    if (schedule) {
      request.schedule_steps = schedule->num_steps();
      request.beta_start = schedule->beta.front();
      request.beta_end = schedule->beta.back();
    }
    if (conditions.landmark_image)
      request.images["landmark"] = *conditions.landmark_image;
    if (conditions.normal_image)
      request.images["normal"] = *conditions.normal_image;
    if (conditions.canny_image)
      request.images["canny"] = *conditions.canny_image;
    if (conditions.depth_image)
      request.images["depth"] = *conditions.depth_image;
    return request;
  }

  RasterImage round_trip(const WireRequest& request) const {
    httplib::Client client(host_, port_);
    client.set_read_timeout(timeout_seconds_, 0);
    client.set_write_timeout(timeout_seconds_, 0);
    const std::string body = pack_request(request);
    const auto result =
        client.Post("/v1/guidance", body, "application/octet-stream");
    if (!result)
      throw Error("external provider: request to " + host_ + ":" +
                  std::to_string(port_) + " failed");
    if (result->status != 200)
      throw Error("external provider: HTTP status " +
                  std::to_string(result->status));
    const WireResponse response = parse_response(result->body);
    if (!response.ok)
      throw Error("external provider: " + response.error);
    const auto it = response.images.find("result");
    if (it == response.images.end())
      throw Error("external provider: response lacks a result image");
    return it->second;
  }

  void fetch_capabilities() {
    httplib::Client client(host_, port_);
    client.set_read_timeout(timeout_seconds_, 0);
    const auto result = client.Get("/v1/capabilities");
    if (!result || result->status != 200)
      throw Error("external provider: cannot fetch capabilities from " +
                  host_ + ":" + std::to_string(port_));
    const nlohmann::json j = nlohmann::json::parse(result->body);
    caps_.predict_epsilon = j.value("predict_epsilon", false);
    caps_.inpaint = j.value("inpaint", false);
    caps_.refine = j.value("refine", false);
    caps_.unconditional = j.value("unconditional", false);
    caps_.identity_dim = j.value("identity_dim", 0);
    if (j.contains("condition_channels"))
      caps_.condition_channels =
          j.at("condition_channels").get<std::vector<std::string>>();
  }

  std::string host_;
  int port_ = 0;
  int timeout_seconds_ = 60;
  ProviderCaps caps_;
};

/// JSON body for GET /v1/capabilities, shared by servers.
inline std::string capabilities_to_json(const ProviderCaps& caps) {
  const nlohmann::json j{{"predict_epsilon", caps.predict_epsilon},
                         {"inpaint", caps.inpaint},
                         {"refine", caps.refine},
                         {"unconditional", caps.unconditional},
                         {"identity_dim", caps.identity_dim},
                         {"condition_channels", caps.condition_channels}};
  return j.dump();
}

}  // namespace sculpt
