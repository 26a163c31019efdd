#include "driftwatch/dataset.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include <json.hpp>

#include "driftwatch/errors.hpp"

namespace driftwatch {

namespace fs = std::filesystem;
using nlohmann::json;

double wrap_angle(double radians) {
  double w = std::remainder(radians, 2.0 * std::numbers::pi);
  if (w <= -std::numbers::pi) {
    w += 2.0 * std::numbers::pi;
  }
  return w;
}

double yaw_from_quaternion(double qx, double qy, double qz, double qw) {
  return wrap_angle(std::atan2(2.0 * (qw * qz + qx * qy), 1.0 - 2.0 * (qy * qy + qz * qz)));
}

namespace {

double number_field(const json& row, const char* key, const std::string& where) {
  auto it = row.find(key);
  if (it == row.end() || !it->is_number()) {
    throw InputError(where + ": missing or non-numeric field \"" + key + "\"");
  }
  double v = it->get<double>();
  if (!std::isfinite(v)) {
    throw InputError(where + ": non-finite value in \"" + key + "\"");
  }
  return v;
}

std::string string_field(const json& row, const char* key, const std::string& where) {
  auto it = row.find(key);
  if (it == row.end() || !it->is_string() || it->get<std::string>().empty()) {
    throw InputError(where + ": missing or empty string field \"" + key + "\"");
  }
  return it->get<std::string>();
}

}  // namespace

RunDataset load_run(const fs::path& dir, RunRole role) {
  const fs::path manifest = dir / kManifestName;
  std::ifstream in(manifest);
  if (!in) {
    throw InputError("missing manifest " + manifest.string());
  }

  RunDataset run;
  run.run_id = fs::absolute(dir).lexically_normal().filename().string();
  if (run.run_id.empty()) {
    run.run_id = fs::absolute(dir).lexically_normal().parent_path().filename().string();
  }
  run.role = role;

  std::set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    const std::string where = manifest.string() + ":" + std::to_string(line_no);
    json row;
    try {
      row = json::parse(line);
    } catch (const json::parse_error& e) {
      throw InputError(where + ": invalid JSON (" + e.what() + ")");
    }
    if (!row.is_object()) {
      throw InputError(where + ": manifest row must be an object");
    }

    ImageRecord rec;
    rec.image_id = string_field(row, "image_id", where);
    const std::string file = string_field(row, "file", where);
    rec.image_path = dir / file;
    rec.pose.timestamp = number_field(row, "t", where);
    rec.pose.x = number_field(row, "x", where);
    rec.pose.y = number_field(row, "y", where);
    rec.pose.z = number_field(row, "z", where);

    const bool has_yaw = row.contains("yaw");
    const bool has_quat = row.contains("qx") || row.contains("qy") || row.contains("qz") || row.contains("qw");
    if (has_yaw == has_quat) {
      throw InputError(where + ": exactly one of \"yaw\" or quaternion (qx,qy,qz,qw) is required");
    }
    if (has_yaw) {
      rec.pose.yaw = wrap_angle(number_field(row, "yaw", where));
    } else {
      rec.pose.yaw = yaw_from_quaternion(number_field(row, "qx", where), number_field(row, "qy", where),
                                         number_field(row, "qz", where), number_field(row, "qw", where));
    }

    if (!seen.insert(rec.image_id).second) {
      throw InputError(where + ": duplicate image_id \"" + rec.image_id + "\"");
    }
    if (!run.records.empty() && rec.pose.timestamp < run.records.back().pose.timestamp) {
      throw InputError(where + ": timestamp " + std::to_string(rec.pose.timestamp) + " precedes previous row");
    }
    if (!fs::is_regular_file(rec.image_path)) {
      throw InputError(where + ": image \"" + file + "\" not found at " + rec.image_path.string());
    }
    const ImageSize size = read_png_size(rec.image_path);
    rec.width = size.width;
    rec.height = size.height;
    run.records.push_back(std::move(rec));
  }
  return run;
}

RunWriter::RunWriter(fs::path dir) : dir_(std::move(dir)) {
  fs::create_directories(dir_ / kImagesDirName);
  manifest_.open(dir_ / kManifestName, std::ios::trunc);
  if (!manifest_) {
    throw InputError("cannot create manifest in " + dir_.string());
  }
}

void RunWriter::add(const std::string& image_id, const GrayImage& image, const Pose& pose) {
  const std::string file = std::string(kImagesDirName) + "/" + image_id + ".png";
  write_png(dir_ / file, image);
  json row = {{"image_id", image_id}, {"file", file}, {"t", pose.timestamp}, {"x", pose.x},
              {"y", pose.y},          {"z", pose.z},  {"yaw", pose.yaw}};
  manifest_ << row.dump() << '\n';
  manifest_.flush();
  if (!manifest_) {
    throw InputError("failed appending to manifest in " + dir_.string());
  }
}

}  // namespace driftwatch
