#pragma once

// JSON encodings shared by the scripted fixture format and the inference
// service protocol.

#include <string>
#include <vector>

#include <json.hpp>

#include "driftwatch/backend.hpp"
#include "driftwatch/segmentation.hpp"

namespace driftwatch::wire {

using nlohmann::json;

// {"keypoints": [[x, y, score]...], "descriptors": {"kind", "dim", "data": [[...]...]}}
// Binary rows hold dim/8 byte values; real rows hold dim floats. A flat
// data array of count*row_length values is accepted on input.
json features_to_json(const Features& features);
Features features_from_json(const json& j, const std::string& path, const std::string& image_id);

// {"class", "score", "bbox": [x0, y0, x1, y1], "mask": {"size": [h, w], "counts": [...]}}
json instance_to_json(const InstanceMask& instance);
InstanceMask instance_from_json(const json& j, const std::string& path);

json rle_to_json(const RleMask& rle);
RleMask rle_from_json(const json& j, const std::string& path);

// [[index_a, index_b, confidence]...]
json matches_to_json(const std::vector<Match>& matches);
std::vector<Match> matches_from_json(const json& j, const std::string& path);

// Shortest decimal form used in fixture keys, e.g. 0.6 -> "0.6", 0 -> "0".
std::string format_threshold(double threshold);

}  // namespace driftwatch::wire

namespace driftwatch::wire {

std::string base64_encode(const std::vector<std::uint8_t>& bytes);
// Throws InputError on malformed input.
std::vector<std::uint8_t> base64_decode(const std::string& text);

}  // namespace driftwatch::wire
