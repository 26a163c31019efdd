#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "driftwatch/geometry.hpp"
#include "driftwatch/image.hpp"

namespace driftwatch {

/// SplitMix64; bit-identical sequences on every platform.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();
  // Inclusive range.
  int uniform_int(int lo, int hi);
  double uniform01();

 private:
  std::uint64_t state_;
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

enum class Shape { rectangle, disc, cross };

/// A foreground object. `bbox` uses inclusive integer pixel bounds. The
/// object carries its own speckle texture, anchored to the bbox origin so it
/// moves with the object.
struct SceneObject {
  Shape shape = Shape::rectangle;
  RectMask bbox;
  std::uint8_t intensity = 220;
  std::uint64_t texture_seed = 0;

  friend bool operator==(const SceneObject&, const SceneObject&) = default;
};

enum class EditKind { insert, remove, move };

struct AnomalyEdit {
  EditKind kind = EditKind::insert;
  std::size_t object = 0;  // remove / move: index into SceneSpec::objects
  SceneObject inserted;    // insert
  int dx = 0;              // move
  int dy = 0;
};

struct SceneSpec {
  std::uint64_t seed = 1;
  int width = 320;
  int height = 240;
  double texture_density = 0.03;  // background speckles per pixel
  std::vector<SceneObject> objects;
  std::vector<AnomalyEdit> anomaly_edits;
  int max_jitter_px = 0;  // query translation, drawn per axis from [-max, max]
  int noise = 0;          // per-pixel uniform noise amplitude, grey levels

  // Throws InputError for objects outside the frame or edits naming missing objects.
  void validate() const;
};

// Background texture (from spec.seed) with `objects` painted in order.
GrayImage render_scene(const SceneSpec& spec, const std::vector<SceneObject>& objects);

// Moves content by (dx, dy); uncovered pixels become mid-gray.
GrayImage translate(const GrayImage& image, int dx, int dy);

void add_noise(GrayImage& image, int amplitude, std::uint64_t seed);

struct ShiftedPair {
  GrayImage a;
  GrayImage b;
  double true_shift = 0.0;
};

/// n pairs of (scene, same scene shifted right by shift_px). Pair k renders
/// spec's objects over a background drawn from mix_seed(seed, k); noise is
/// drawn independently per image.
std::vector<ShiftedPair> generate_calibration_pairs(std::uint64_t seed, int shift_px, std::size_t n,
                                                    const SceneSpec& spec);

struct Scenario {
  GrayImage reference;
  GrayImage query;
  std::vector<RectMask> truth;  // one box per edit, in query coordinates
  int jitter_x = 0;
  int jitter_y = 0;
};

/// Reference renders spec.objects. Query applies the edits, then a jitter
/// translation. A move's truth box spans both the old and new positions.
Scenario generate_scenario(const SceneSpec& spec);

/// A random textured scene with `objects` objects and `edits` edits of the
/// given kinds, cycled in order.
SceneSpec random_scene(std::uint64_t seed, int width, int height, std::size_t objects,
                       const std::vector<EditKind>& edit_kinds);

/// Whole-mission generator for the `gen` command. Writes
///   <out>/reference/, <out>/query/   run directories
///   <out>/truth.json                 ground truth for the query run
///   <out>/calibration/               shifted calibration pairs
struct MissionSpec {
  std::uint64_t seed = 1;
  int width = 320;
  int height = 240;
  std::size_t frames = 20;
  std::size_t anomaly_frames = 5;
  std::size_t objects_per_frame = 3;
  int jitter_px = 3;
  int noise = 3;
  int calibration_noise = 45;
  double texture_density = 0.03;
  double frame_spacing_m = 1.0;
  std::size_t calibration_pairs = 3;
  int calibration_shift_px = 12;
};

MissionSpec parse_mission_spec(std::string_view json_text);
void generate_mission(const MissionSpec& spec, const std::filesystem::path& out_dir);

}  // namespace driftwatch
