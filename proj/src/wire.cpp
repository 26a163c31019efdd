#include "driftwatch/wire.hpp"

#include <charconv>

#include "json_fields.hpp"

namespace driftwatch::wire {

using namespace detail;

json features_to_json(const Features& f) {
  json kps = json::array();
  for (const auto& k : f.keypoints) {
    kps.push_back(json::array({k.x, k.y, k.score}));
  }
  const auto& d = f.descriptors;
  json rows = json::array();
  for (std::size_t i = 0; i < d.size(); ++i) {
    json row = json::array();
    if (d.kind == DescriptorKind::binary) {
      const auto* r = d.binary_row(i);
      for (std::size_t b = 0; b < d.row_bytes(); ++b) {
        row.push_back(static_cast<int>(r[b]));
      }
    } else {
      const auto* r = d.real_row(i);
      for (std::size_t b = 0; b < d.dim; ++b) {
        row.push_back(r[b]);
      }
    }
    rows.push_back(std::move(row));
  }
  return {{"keypoints", std::move(kps)},
          {"descriptors", {{"kind", to_string(d.kind)}, {"dim", d.dim}, {"data", std::move(rows)}}}};
}

Features features_from_json(const json& j, const std::string& path, const std::string& image_id) {
  Features f;
  f.image_id = image_id;
  const std::string kp_path = join_path(path, "keypoints");
  const json& kps = as_array(require(j, path, "keypoints"), kp_path);
  for (std::size_t i = 0; i < kps.size(); ++i) {
    const std::string p = index_path(kp_path, i);
    if (!kps[i].is_array() || kps[i].size() != 3) {
      schema_fail(p, "expected [x, y, score]");
    }
    Keypoint k{as_number(kps[i][0], p + "[0]"), as_number(kps[i][1], p + "[1]"), as_number(kps[i][2], p + "[2]")};
    if (k.score < 0.0 || k.score > 1.0) {
      schema_fail(p + "[2]", "score outside [0, 1]");
    }
    f.keypoints.push_back(k);
  }

  const std::string d_path = join_path(path, "descriptors");
  const json& d = require(j, path, "descriptors");
  const std::string kind = as_string(require(d, d_path, "kind"), join_path(d_path, "kind"));
  if (kind == "binary") {
    f.descriptors.kind = DescriptorKind::binary;
  } else if (kind == "real") {
    f.descriptors.kind = DescriptorKind::real;
  } else {
    schema_fail(join_path(d_path, "kind"), "expected \"binary\" or \"real\"");
  }
  f.descriptors.dim = as_count(require(d, d_path, "dim"), join_path(d_path, "dim"));
  if (f.descriptors.dim == 0 || (f.descriptors.kind == DescriptorKind::binary && f.descriptors.dim % 8 != 0)) {
    schema_fail(join_path(d_path, "dim"), "must be positive (and a multiple of 8 for binary)");
  }
  const std::size_t row_len =
      f.descriptors.kind == DescriptorKind::binary ? f.descriptors.row_bytes() : f.descriptors.dim;

  const std::string data_path = join_path(d_path, "data");
  const json& data = as_array(require(d, d_path, "data"), data_path);
  std::vector<double> flat;
  if (!data.empty() && data[0].is_array()) {
    for (std::size_t i = 0; i < data.size(); ++i) {
      const std::string rp = index_path(data_path, i);
      if (!data[i].is_array() || data[i].size() != row_len) {
        schema_fail(rp, "expected a row of " + std::to_string(row_len) + " values");
      }
      for (std::size_t b = 0; b < row_len; ++b) {
        flat.push_back(as_number(data[i][b], index_path(rp, b)));
      }
    }
  } else {
    for (std::size_t i = 0; i < data.size(); ++i) {
      flat.push_back(as_number(data[i], index_path(data_path, i)));
    }
  }
  if (flat.size() != row_len * f.keypoints.size()) {
    schema_fail(data_path, "holds " + std::to_string(flat.size()) + " values, expected " +
                               std::to_string(row_len * f.keypoints.size()) + " (one row per keypoint)");
  }
  if (f.descriptors.kind == DescriptorKind::binary) {
    f.descriptors.bits.reserve(flat.size());
    for (std::size_t i = 0; i < flat.size(); ++i) {
      if (flat[i] < 0 || flat[i] > 255 || flat[i] != static_cast<int>(flat[i])) {
        schema_fail(data_path, "binary descriptor bytes must be integers in [0, 255]");
      }
      f.descriptors.bits.push_back(static_cast<std::uint8_t>(flat[i]));
    }
  } else {
    f.descriptors.values.assign(flat.begin(), flat.end());
  }
  return f;
}

json rle_to_json(const RleMask& rle) {
  return {{"size", json::array({rle.height, rle.width})}, {"counts", rle.counts}};
}

RleMask rle_from_json(const json& j, const std::string& path) {
  RleMask rle;
  const std::string size_path = join_path(path, "size");
  const json& size = as_array(require(j, path, "size"), size_path);
  if (size.size() != 2) {
    schema_fail(size_path, "expected [h, w]");
  }
  rle.height = static_cast<int>(as_int(size[0], size_path + "[0]"));
  rle.width = static_cast<int>(as_int(size[1], size_path + "[1]"));
  const std::string counts_path = join_path(path, "counts");
  const json& counts = as_array(require(j, path, "counts"), counts_path);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    rle.counts.push_back(static_cast<std::uint32_t>(as_count(counts[i], index_path(counts_path, i))));
  }
  return rle;
}

json instance_to_json(const InstanceMask& inst) {
  return {{"class", inst.class_label},
          {"score", inst.score},
          {"bbox", rect_to_json(inst.bbox)},
          {"mask", rle_to_json(encode_rle(inst.mask))}};
}

InstanceMask instance_from_json(const json& j, const std::string& path) {
  InstanceMask inst;
  inst.class_label = as_string(require(j, path, "class"), join_path(path, "class"));
  inst.score = as_number(require(j, path, "score"), join_path(path, "score"));
  inst.bbox = rect_from_json(require(j, path, "bbox"), join_path(path, "bbox"));
  const std::string mask_path = join_path(path, "mask");
  try {
    inst.mask = decode_rle(rle_from_json(require(j, path, "mask"), mask_path));
    validate_instance(inst);
  } catch (const SchemaError&) {
    throw;
  } catch (const InputError& e) {
    schema_fail(mask_path, e.what());
  }
  return inst;
}

json matches_to_json(const std::vector<Match>& matches) {
  json out = json::array();
  for (const auto& m : matches) {
    out.push_back(json::array({m.index_a, m.index_b, m.confidence}));
  }
  return out;
}

std::vector<Match> matches_from_json(const json& j, const std::string& path) {
  std::vector<Match> out;
  as_array(j, path);
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = index_path(path, i);
    if (!j[i].is_array() || j[i].size() != 3) {
      schema_fail(p, "expected [index_a, index_b, confidence]");
    }
    Match m{as_count(j[i][0], p + "[0]"), as_count(j[i][1], p + "[1]"), as_number(j[i][2], p + "[2]")};
    if (m.confidence < 0.0 || m.confidence > 1.0) {
      schema_fail(p + "[2]", "confidence outside [0, 1]");
    }
    out.push_back(m);
  }
  return out;
}

std::string format_threshold(double threshold) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, threshold);
  return std::string(buf, end);
}

}  // namespace driftwatch::wire

#include <openssl/evp.h>

namespace driftwatch::wire {

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
  if (text.size() % 4 != 0) {
    throw InputError("base64 length is not a multiple of 4");
  }
  std::vector<std::uint8_t> out(3 * (text.size() / 4));
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0) {
    throw InputError("malformed base64");
  }
  // EVP_DecodeBlock keeps the bytes produced by '=' padding.
  std::size_t pad = 0;
  if (!text.empty() && text.back() == '=') {
    pad = text.size() >= 2 && text[text.size() - 2] == '=' ? 2 : 1;
  }
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

}  // namespace driftwatch::wire
