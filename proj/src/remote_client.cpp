#include "driftwatch/remote.hpp"

#include <chrono>
#include <cmath>

#include <httplib.h>

#include "driftwatch/errors.hpp"
#include "driftwatch/wire.hpp"

namespace driftwatch {

using nlohmann::json;

namespace {

httplib::Client make_client(const RemoteOptions& opts) {
  httplib::Client cli(opts.base_url);
  const auto timeout = std::chrono::microseconds(static_cast<std::int64_t>(std::llround(opts.timeout_seconds * 1e6)));
  cli.set_connection_timeout(timeout);
  cli.set_read_timeout(timeout);
  cli.set_write_timeout(timeout);
  return cli;
}

json handle(const httplib::Result& res, const std::string& what) {
  if (!res) {
    throw BackendError(what + ": transport error (" + httplib::to_string(res.error()) + ")");
  }
  if (res->status != 200) {
    std::string detail = res->body;
    try {
      auto j = json::parse(res->body);
      if (j.is_object() && j.contains("error") && j["error"].is_string()) {
        detail = j["error"].get<std::string>();
      }
    } catch (const json::exception&) {
    }
    throw BackendError(what + ": HTTP " + std::to_string(res->status) + " (" + detail + ")");
  }
  try {
    return json::parse(res->body);
  } catch (const json::parse_error& e) {
    throw BackendError(what + ": response is not JSON (" + e.what() + ")");
  }
}

template <typename F>
auto protocol_guard(const std::string& what, F&& f) {
  try {
    return f();
  } catch (const SchemaError& e) {
    throw BackendError(what + ": response violates protocol (" + e.what() + ")");
  }
}

}  // namespace

json ServiceClient::post(const std::string& path, const json& body) const {
  auto cli = make_client(options_);
  return handle(cli.Post(path, body.dump(), "application/json"), "POST " + path);
}

json ServiceClient::get(const std::string& path) const {
  auto cli = make_client(options_);
  return handle(cli.Get(path), "GET " + path);
}

ServiceHealth service_health(const ServiceClient& client) {
  const json res = client.get("/v1/health");
  return protocol_guard("/v1/health", [&] {
    ServiceHealth h;
    if (!res.is_object() || !res.contains("status") || !res["status"].is_string()) {
      throw SchemaError("status: required string missing");
    }
    h.status = res["status"].get<std::string>();
    if (res.contains("models")) {
      if (!res["models"].is_object()) {
        throw SchemaError("models: expected an object");
      }
      for (auto it = res["models"].begin(); it != res["models"].end(); ++it) {
        if (!it.value().is_boolean()) {
          throw SchemaError("models." + it.key() + ": expected a boolean");
        }
        h.models[it.key()] = it.value().get<bool>();
      }
    }
    return h;
  });
}

Features RemoteBackend::extract(const std::string& image_id, const GrayImage& image) const {
  const json body = {{"image", wire::base64_encode(encode_png(image))}};
  const json res = client_.post("/v1/extract", body);
  return protocol_guard("/v1/extract", [&] { return wire::features_from_json(res, "", image_id); });
}

MatchResult RemoteBackend::match(const Features& a, const Features& b, double threshold) const {
  if (!compatible(a.descriptors, b.descriptors)) {
    throw InputError("incompatible descriptors for \"" + a.image_id + "\" and \"" + b.image_id + "\"");
  }
  const json body = {{"a", wire::features_to_json(a)},
                     {"b", wire::features_to_json(b)},
                     {"match_threshold", threshold},
                     {"options", client_.options().options}};
  const json res = client_.post("/v1/match", body);
  auto pairs = protocol_guard("/v1/match", [&] {
    if (!res.is_object() || !res.contains("pairs")) {
      throw SchemaError("pairs: required field missing");
    }
    return wire::matches_from_json(res["pairs"], "pairs");
  });
  for (const auto& m : pairs) {
    if (m.confidence < threshold) {
      throw BackendError("/v1/match: returned confidence " + std::to_string(m.confidence) + " below threshold " +
                         std::to_string(threshold));
    }
  }
  return assemble_matches(std::move(pairs), a.keypoints.size(), b.keypoints.size(), threshold);
}

std::vector<InstanceMask> RemoteSegmenter::segment(const std::string&, const GrayImage& image) const {
  const json body = {{"image", wire::base64_encode(encode_png(image))}};
  const json res = client_.post("/v1/segment", body);
  auto instances = protocol_guard("/v1/segment", [&] {
    if (!res.is_object() || !res.contains("instances") || !res["instances"].is_array()) {
      throw SchemaError("instances: required array missing");
    }
    std::vector<InstanceMask> out;
    for (std::size_t i = 0; i < res["instances"].size(); ++i) {
      auto inst = wire::instance_from_json(res["instances"][i], "instances[" + std::to_string(i) + "]");
      if (inst.mask.width != image.width || inst.mask.height != image.height) {
        throw SchemaError("instances[" + std::to_string(i) + "].mask: size does not match the image");
      }
      out.push_back(std::move(inst));
    }
    return out;
  });
  sort_by_score(instances);
  return instances;
}

}  // namespace driftwatch
