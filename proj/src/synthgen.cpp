#include "driftwatch/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "driftwatch/calibration.hpp"
#include "driftwatch/dataset.hpp"
#include "driftwatch/errors.hpp"
#include "driftwatch/evaluation.hpp"
#include "json_fields.hpp"

namespace driftwatch {

using namespace detail;

std::uint64_t SeededRng::next() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

int SeededRng::uniform_int(int lo, int hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<int>(next() % span);
}

double SeededRng::uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  SeededRng rng(seed ^ (salt * 0xd1b54a32d192ed03ull));
  rng.next();
  return rng.next();
}

namespace {

constexpr std::uint8_t kMidGray = 128;
constexpr double kObjectSpeckleDensity = 0.05;

std::uint8_t clamp_u8(int v) { return static_cast<std::uint8_t>(std::clamp(v, 0, 255)); }

void paint_block(GrayImage& img, int x0, int y0, int w, int h, std::uint8_t v) {
  for (int y = std::max(0, y0); y < std::min(img.height, y0 + h); ++y) {
    for (int x = std::max(0, x0); x < std::min(img.width, x0 + w); ++x) {
      img.at(x, y) = v;
    }
  }
}

bool in_shape(const SceneObject& obj, int x, int y) {
  const double w = obj.bbox.x_max - obj.bbox.x_min + 1;
  const double h = obj.bbox.y_max - obj.bbox.y_min + 1;
  const double lx = x - obj.bbox.x_min;
  const double ly = y - obj.bbox.y_min;
  switch (obj.shape) {
    case Shape::rectangle:
      return true;
    case Shape::disc: {
      const double nx = (lx + 0.5) / w * 2.0 - 1.0;
      const double ny = (ly + 0.5) / h * 2.0 - 1.0;
      return nx * nx + ny * ny <= 1.0;
    }
    case Shape::cross:
      return (lx >= w / 3.0 && lx < 2.0 * w / 3.0) || (ly >= h / 3.0 && ly < 2.0 * h / 3.0);
  }
  return false;
}

void paint_object(GrayImage& img, const SceneObject& obj) {
  const int x0 = static_cast<int>(obj.bbox.x_min);
  const int y0 = static_cast<int>(obj.bbox.y_min);
  const int w = static_cast<int>(obj.bbox.x_max) - x0 + 1;
  const int h = static_cast<int>(obj.bbox.y_max) - y0 + 1;

  GrayImage local(w, h, obj.intensity);
  const std::uint8_t contrast = obj.intensity >= kMidGray ? 25 : 230;
  SeededRng rng(obj.texture_seed);
  const auto count = static_cast<std::size_t>(kObjectSpeckleDensity * w * h);
  for (std::size_t i = 0; i < count; ++i) {
    const int s = rng.uniform_int(2, 3);
    paint_block(local, rng.uniform_int(0, w - 1), rng.uniform_int(0, h - 1), s, s, contrast);
  }

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int gx = x0 + x;
      const int gy = y0 + y;
      if (gx >= 0 && gy >= 0 && gx < img.width && gy < img.height && in_shape(obj, gx, gy)) {
        img.at(gx, gy) = local.at(x, y);
      }
    }
  }
}

RectMask shifted(const RectMask& r, int dx, int dy) { return {r.x_min + dx, r.y_min + dy, r.x_max + dx, r.y_max + dy}; }

bool overlaps_any(const RectMask& r, const std::vector<SceneObject>& objects, double gap) {
  const RectMask grown{r.x_min - gap, r.y_min - gap, r.x_max + gap, r.y_max + gap};
  return std::any_of(objects.begin(), objects.end(), [&](const SceneObject& o) { return grown.intersects(o.bbox); });
}

SceneObject random_object(SeededRng& rng, int width, int height, const std::vector<SceneObject>& avoid) {
  constexpr int kMargin = 20;
  SceneObject obj;
  for (int attempt = 0; attempt < 100; ++attempt) {
    const int w = rng.uniform_int(32, 52);
    const int h = rng.uniform_int(32, 52);
    const int x = rng.uniform_int(kMargin, width - kMargin - w);
    const int y = rng.uniform_int(kMargin, height - kMargin - h);
    obj.bbox = {static_cast<double>(x), static_cast<double>(y), static_cast<double>(x + w - 1),
                static_cast<double>(y + h - 1)};
    if (!overlaps_any(obj.bbox, avoid, 8.0)) {
      break;
    }
  }
  obj.shape = static_cast<Shape>(rng.uniform_int(0, 2));
  obj.intensity = rng.uniform_int(0, 1) ? static_cast<std::uint8_t>(rng.uniform_int(200, 240))
                                        : static_cast<std::uint8_t>(rng.uniform_int(15, 55));
  obj.texture_seed = rng.next();
  return obj;
}

}  // namespace

void SceneSpec::validate() const {
  if (width < 64 || height < 64) {
    throw InputError("scene must be at least 64x64 pixels");
  }
  if (texture_density < 0.0 || max_jitter_px < 0 || noise < 0) {
    throw InputError("scene texture density, jitter, and noise must be non-negative");
  }
  const RectMask frame{0, 0, static_cast<double>(width - 1), static_cast<double>(height - 1)};
  auto check_obj = [&](const SceneObject& o, const std::string& what) {
    if (!o.bbox.valid() || o.bbox.x_min < frame.x_min || o.bbox.y_min < frame.y_min || o.bbox.x_max > frame.x_max ||
        o.bbox.y_max > frame.y_max) {
      throw InputError(what + " lies outside the frame");
    }
  };
  for (std::size_t i = 0; i < objects.size(); ++i) {
    check_obj(objects[i], "object " + std::to_string(i));
  }
  for (std::size_t i = 0; i < anomaly_edits.size(); ++i) {
    const auto& e = anomaly_edits[i];
    if (e.kind == EditKind::insert) {
      check_obj(e.inserted, "inserted object of edit " + std::to_string(i));
    } else if (e.object >= objects.size()) {
      throw InputError("edit " + std::to_string(i) + " references missing object " + std::to_string(e.object));
    } else if (e.kind == EditKind::move) {
      check_obj({objects[e.object].shape, shifted(objects[e.object].bbox, e.dx, e.dy)}, "moved object of edit " +
                                                                                          std::to_string(i));
    }
  }
}

GrayImage render_scene(const SceneSpec& spec, const std::vector<SceneObject>& objects) {
  GrayImage img(spec.width, spec.height, kMidGray);
  SeededRng rng(mix_seed(spec.seed, 0xb6));
  const auto count = static_cast<std::size_t>(spec.texture_density * spec.width * spec.height);
  for (std::size_t i = 0; i < count; ++i) {
    const int s = rng.uniform_int(2, 4);
    const int x = rng.uniform_int(0, spec.width - 1);
    const int y = rng.uniform_int(0, spec.height - 1);
    const auto v = rng.uniform_int(0, 1) ? static_cast<std::uint8_t>(rng.uniform_int(175, 225))
                                         : static_cast<std::uint8_t>(rng.uniform_int(30, 80));
    paint_block(img, x, y, s, s, v);
  }
  for (const auto& obj : objects) {
    paint_object(img, obj);
  }
  return img;
}

GrayImage translate(const GrayImage& image, int dx, int dy) {
  GrayImage out(image.width, image.height, kMidGray);
  for (int y = 0; y < image.height; ++y) {
    const int sy = y - dy;
    if (sy < 0 || sy >= image.height) {
      continue;
    }
    for (int x = 0; x < image.width; ++x) {
      const int sx = x - dx;
      if (sx >= 0 && sx < image.width) {
        out.at(x, y) = image.at(sx, sy);
      }
    }
  }
  return out;
}

void add_noise(GrayImage& image, int amplitude, std::uint64_t seed) {
  if (amplitude <= 0) {
    return;
  }
  SeededRng rng(seed);
  for (auto& p : image.pixels) {
    p = clamp_u8(p + rng.uniform_int(-amplitude, amplitude));
  }
}

std::vector<ShiftedPair> generate_calibration_pairs(std::uint64_t seed, int shift_px, std::size_t n,
                                                    const SceneSpec& spec) {
  spec.validate();
  if (shift_px < 0 || shift_px >= spec.width) {
    throw InputError("calibration shift must be in [0, width)");
  }
  std::vector<ShiftedPair> pairs;
  for (std::size_t k = 0; k < n; ++k) {
    SceneSpec scene = spec;
    scene.seed = mix_seed(seed, k);
    const GrayImage base = render_scene(scene, scene.objects);
    ShiftedPair p{base, translate(base, shift_px, 0), static_cast<double>(shift_px)};
    add_noise(p.a, spec.noise, mix_seed(scene.seed, 1));
    add_noise(p.b, spec.noise, mix_seed(scene.seed, 2));
    pairs.push_back(std::move(p));
  }
  return pairs;
}

Scenario generate_scenario(const SceneSpec& spec) {
  spec.validate();
  Scenario s;
  s.reference = render_scene(spec, spec.objects);

  std::vector<SceneObject> edited = spec.objects;
  std::vector<bool> removed(edited.size(), false);
  std::vector<RectMask> truth;
  for (const auto& e : spec.anomaly_edits) {
    switch (e.kind) {
      case EditKind::insert:
        edited.push_back(e.inserted);
        removed.push_back(false);
        truth.push_back(e.inserted.bbox);
        break;
      case EditKind::remove:
        removed[e.object] = true;
        truth.push_back(spec.objects[e.object].bbox);
        break;
      case EditKind::move: {
        const RectMask from = spec.objects[e.object].bbox;
        const RectMask to = shifted(from, e.dx, e.dy);
        edited[e.object].bbox = to;
        truth.push_back({std::min(from.x_min, to.x_min), std::min(from.y_min, to.y_min), std::max(from.x_max, to.x_max),
                         std::max(from.y_max, to.y_max)});
        break;
      }
    }
  }
  std::vector<SceneObject> present;
  for (std::size_t i = 0; i < edited.size(); ++i) {
    if (!removed[i]) {
      present.push_back(edited[i]);
    }
  }

  SeededRng jitter(mix_seed(spec.seed, 0x717));
  if (spec.max_jitter_px > 0) {
    s.jitter_x = jitter.uniform_int(-spec.max_jitter_px, spec.max_jitter_px);
    s.jitter_y = jitter.uniform_int(-spec.max_jitter_px, spec.max_jitter_px);
  }
  s.query = translate(render_scene(spec, present), s.jitter_x, s.jitter_y);

  const double w = spec.width - 1;
  const double h = spec.height - 1;
  for (const auto& t : truth) {
    const RectMask m = shifted(t, s.jitter_x, s.jitter_y);
    s.truth.push_back({std::clamp(m.x_min, 0.0, w), std::clamp(m.y_min, 0.0, h), std::clamp(m.x_max, 0.0, w),
                       std::clamp(m.y_max, 0.0, h)});
  }
  add_noise(s.reference, spec.noise, mix_seed(spec.seed, 1));
  add_noise(s.query, spec.noise, mix_seed(spec.seed, 2));
  return s;
}

SceneSpec random_scene(std::uint64_t seed, int width, int height, std::size_t objects,
                       const std::vector<EditKind>& edit_kinds) {
  SceneSpec spec;
  spec.seed = seed;
  spec.width = width;
  spec.height = height;
  SeededRng rng(mix_seed(seed, 0x0b1));
  for (std::size_t i = 0; i < objects; ++i) {
    spec.objects.push_back(random_object(rng, width, height, spec.objects));
  }

  std::vector<std::size_t> free_objects(spec.objects.size());
  std::iota(free_objects.begin(), free_objects.end(), std::size_t{0});
  std::vector<SceneObject> occupied = spec.objects;
  for (auto kind : edit_kinds) {
    AnomalyEdit e;
    e.kind = kind;
    if (kind != EditKind::insert && free_objects.empty()) {
      kind = e.kind = EditKind::insert;
    }
    if (kind == EditKind::insert) {
      e.inserted = random_object(rng, width, height, occupied);
      occupied.push_back(e.inserted);
    } else {
      const auto pick = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(free_objects.size()) - 1));
      e.object = free_objects[pick];
      free_objects.erase(free_objects.begin() + static_cast<std::ptrdiff_t>(pick));
      if (kind == EditKind::move) {
        std::vector<SceneObject> others;
        for (std::size_t i = 0; i < occupied.size(); ++i) {
          if (i != e.object) {
            others.push_back(occupied[i]);
          }
        }
        const SceneObject& src = spec.objects[e.object];
        SceneObject target = random_object(rng, width, height, others);
        const double w = src.bbox.x_max - src.bbox.x_min;
        const double h = src.bbox.y_max - src.bbox.y_min;
        const double x = std::min(target.bbox.x_min, width - 21 - w);
        const double y = std::min(target.bbox.y_min, height - 21 - h);
        e.dx = static_cast<int>(x - src.bbox.x_min);
        e.dy = static_cast<int>(y - src.bbox.y_min);
        occupied.push_back({src.shape, shifted(src.bbox, e.dx, e.dy)});
      }
    }
    spec.anomaly_edits.push_back(e);
  }
  return spec;
}

MissionSpec parse_mission_spec(std::string_view json_text) {
  const json doc = parse_document(json_text, "mission spec");
  if (!doc.is_object()) {
    schema_fail("", "mission spec must be an object");
  }
  MissionSpec m;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string& k = it.key();
    const json& v = it.value();
    if (k == "seed") {
      m.seed = static_cast<std::uint64_t>(as_count(v, k));
    } else if (k == "width") {
      m.width = static_cast<int>(as_count(v, k));
    } else if (k == "height") {
      m.height = static_cast<int>(as_count(v, k));
    } else if (k == "frames") {
      m.frames = as_count(v, k);
    } else if (k == "anomaly_frames") {
      m.anomaly_frames = as_count(v, k);
    } else if (k == "objects_per_frame") {
      m.objects_per_frame = as_count(v, k);
    } else if (k == "jitter_px") {
      m.jitter_px = static_cast<int>(as_count(v, k));
    } else if (k == "noise") {
      m.noise = static_cast<int>(as_count(v, k));
    } else if (k == "calibration_noise") {
      m.calibration_noise = static_cast<int>(as_count(v, k));
    } else if (k == "texture_density") {
      m.texture_density = as_number(v, k);
    } else if (k == "frame_spacing_m") {
      m.frame_spacing_m = as_number(v, k);
    } else if (k == "calibration_pairs") {
      m.calibration_pairs = as_count(v, k);
    } else if (k == "calibration_shift_px") {
      m.calibration_shift_px = static_cast<int>(as_count(v, k));
    } else {
      schema_fail(k, "unknown key");
    }
  }
  if (m.anomaly_frames > m.frames) {
    schema_fail("anomaly_frames", "exceeds frames");
  }
  if (m.calibration_pairs == 0) {
    schema_fail("calibration_pairs", "must be >= 1");
  }
  return m;
}

void generate_mission(const MissionSpec& spec, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  SeededRng rng(mix_seed(spec.seed, 0x3155));
  std::vector<std::size_t> order(spec.frames);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i) - 1))]);
  }
  std::vector<bool> anomalous(spec.frames, false);
  for (std::size_t i = 0; i < spec.anomaly_frames; ++i) {
    anomalous[order[i]] = true;
  }

  RunWriter reference(out_dir / "reference");
  RunWriter query(out_dir / "query");
  GroundTruth truth;
  const std::vector<EditKind> kinds{EditKind::insert, EditKind::remove, EditKind::move};
  std::size_t anomaly_index = 0;
  for (std::size_t i = 0; i < spec.frames; ++i) {
    const std::uint64_t frame_seed = mix_seed(spec.seed, 1000 + i);
    std::vector<EditKind> edits;
    if (anomalous[i]) {
      edits.push_back(kinds[anomaly_index++ % kinds.size()]);
    }
    SceneSpec scene = random_scene(frame_seed, spec.width, spec.height, spec.objects_per_frame, edits);
    scene.texture_density = spec.texture_density;
    scene.max_jitter_px = spec.jitter_px;
    scene.noise = spec.noise;
    const Scenario s = generate_scenario(scene);

    char ref_id[32];
    char qry_id[32];
    std::snprintf(ref_id, sizeof ref_id, "ref_%04zu", i);
    std::snprintf(qry_id, sizeof qry_id, "qry_%04zu", i);
    SeededRng pose_rng(mix_seed(frame_seed, 0x905e));
    const double x = static_cast<double>(i) * spec.frame_spacing_m;
    reference.add(ref_id, s.reference, Pose{x, 0.0, 0.0, 0.0, static_cast<double>(i)});
    query.add(qry_id, s.query,
              Pose{x + (pose_rng.uniform01() - 0.5) * 0.1, (pose_rng.uniform01() - 0.5) * 0.1, 0.0,
                   (pose_rng.uniform01() - 0.5) * 0.04, static_cast<double>(i)});
    truth.frames[qry_id] = s.truth;
  }
  save_truth(truth, out_dir / "truth.json");

  SceneSpec calib = random_scene(mix_seed(spec.seed, 0xca1), spec.width, spec.height, spec.objects_per_frame, {});
  calib.texture_density = spec.texture_density;
  calib.noise = spec.calibration_noise;
  const auto shifted_pairs =
      generate_calibration_pairs(mix_seed(spec.seed, 0xca2), spec.calibration_shift_px, spec.calibration_pairs, calib);
  std::vector<CalibrationPair> pairs;
  for (std::size_t k = 0; k < shifted_pairs.size(); ++k) {
    pairs.push_back({"cal_" + std::to_string(k) + "_a", shifted_pairs[k].a, "cal_" + std::to_string(k) + "_b",
                     shifted_pairs[k].b});
  }
  write_calibration_pairs(out_dir / "calibration", pairs);
}

}  // namespace driftwatch
