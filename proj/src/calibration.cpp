#include "driftwatch/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "driftwatch/atomic_file.hpp"
#include "driftwatch/errors.hpp"
#include "json_fields.hpp"

namespace driftwatch {

using namespace detail;

PairStats pair_cv(std::span<const MatchedCoords> matches) {
  PairStats s;
  s.matched = matches.size();
  if (matches.empty()) {
    return s;
  }
  double sum = 0.0;
  for (const auto& [a, b] : matches) {
    sum += distance(a, b);
  }
  s.mean = sum / static_cast<double>(matches.size());
  double sq = 0.0;
  for (const auto& [a, b] : matches) {
    const double d = distance(a, b) - s.mean;
    sq += d * d;
  }
  s.stddev = std::sqrt(sq / static_cast<double>(matches.size()));
  s.cv = s.mean > 0.0 ? s.stddev / s.mean : 0.0;
  s.defined = matches.size() >= 2;
  return s;
}

CalibrationCurve build_curve(std::vector<double> thresholds, std::vector<std::vector<PairStats>> per_pair) {
  if (thresholds.size() != per_pair.size()) {
    throw InputError("statistics matrix has " + std::to_string(per_pair.size()) + " rows for " +
                     std::to_string(thresholds.size()) + " thresholds");
  }
  CalibrationCurve curve;
  curve.pair_count = per_pair.empty() ? 0 : per_pair.front().size();
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    if (per_pair[t].size() != curve.pair_count) {
      throw InputError("statistics matrix rows differ in length");
    }
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t n = 0; n < per_pair[t].size(); ++n) {
      const auto& s = per_pair[t][n];
      if (!s.defined) {
        curve.excluded.push_back({thresholds[t], n});
        continue;
      }
      sum += s.cv / static_cast<double>(s.matched);
      ++used;
    }
    curve.cv_values.push_back(used ? sum / static_cast<double>(used) : std::numeric_limits<double>::quiet_NaN());
  }
  curve.thresholds = std::move(thresholds);
  curve.per_pair = std::move(per_pair);
  return curve;
}

CalibrationCurve sweep(std::span<const CalibrationPair> pairs, std::span<const double> thresholds,
                       const FeatureBackend& backend) {
  if (pairs.empty()) {
    throw InputError("calibration needs at least one image pair");
  }
  if (thresholds.empty()) {
    throw InputError("calibration needs at least one threshold");
  }
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (!(thresholds[i] >= 0.0 && thresholds[i] < 1.0) || (i > 0 && thresholds[i] <= thresholds[i - 1])) {
      throw InputError("thresholds must be strictly increasing values in [0, 1)");
    }
  }

  std::vector<Features> fa;
  std::vector<Features> fb;
  for (std::size_t n = 0; n < pairs.size(); ++n) {
    try {
      fa.push_back(backend.extract(pairs[n].id_a, pairs[n].image_a));
      fb.push_back(backend.extract(pairs[n].id_b, pairs[n].image_b));
    } catch (const BackendError& e) {
      throw BackendError("calibration pair " + std::to_string(n) + ": " + e.what());
    }
  }

  std::vector<std::vector<PairStats>> matrix(thresholds.size(), std::vector<PairStats>(pairs.size()));
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    for (std::size_t n = 0; n < pairs.size(); ++n) {
      MatchResult m;
      try {
        m = backend.match(fa[n], fb[n], thresholds[t]);
      } catch (const BackendError& e) {
        throw BackendError("calibration pair " + std::to_string(n) + ": " + e.what());
      }
      std::vector<MatchedCoords> coords;
      coords.reserve(m.matches.size());
      for (const auto& mm : m.matches) {
        coords.emplace_back(fa[n].keypoints[mm.index_a].point(), fb[n].keypoints[mm.index_b].point());
      }
      matrix[t][n] = pair_cv(coords);
      matrix[t][n].pair_index = n;
    }
  }
  return build_curve(std::vector<double>(thresholds.begin(), thresholds.end()), std::move(matrix));
}

KneeResult find_knee(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw InputError("knee: x and y lengths differ");
  }
  if (xs.size() < 3) {
    throw InputError("knee: need at least 3 points, got " + std::to_string(xs.size()));
  }
  const double x0 = xs.front();
  const double y0 = ys.front();
  const double x1 = xs.back();
  const double y1 = ys.back();
  const double span_x = x1 - x0;

  double scale = 0.0;
  for (double y : ys) {
    scale = std::max(scale, std::abs(y));
  }
  KneeResult best{0, x0, y0, true};
  double best_dev = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double chord = span_x == 0.0 ? y0 : y0 + (y1 - y0) * (xs[i] - x0) / span_x;
    const double dev = chord - ys[i];
    if (dev > best_dev) {
      best_dev = dev;
      best = {i, xs[i], ys[i], false};
    }
  }
  // Rounding residue on a straight line is not a knee.
  if (best_dev <= 1e-12 * scale) {
    return {0, x0, y0, true};
  }
  return best;
}

KneeResult knee(const CalibrationCurve& curve) {
  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < curve.thresholds.size(); ++i) {
    if (std::isfinite(curve.cv_values[i])) {
      xs.push_back(curve.thresholds[i]);
      ys.push_back(curve.cv_values[i]);
      idx.push_back(i);
    }
  }
  KneeResult r = find_knee(xs, ys);
  r.index = idx[r.index];
  return r;
}

std::vector<double> k_distances(std::span<const Point2> points, std::size_t k) {
  if (k == 0 || points.size() <= k) {
    throw InputError("k-distance needs more than k points");
  }
  std::vector<double> out;
  out.reserve(points.size());
  std::vector<double> d(points.size() - 1);
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::size_t w = 0;
    for (std::size_t j = 0; j < points.size(); ++j) {
      if (j != i) {
        d[w++] = distance(points[i], points[j]);
      }
    }
    std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k - 1), d.end());
    out.push_back(d[k - 1]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

double calibrate_eps(std::span<const std::vector<Point2>> point_sets, std::size_t min_pts) {
  if (min_pts < 2) {
    throw InputError("min_pts must be at least 2");
  }
  double sum = 0.0;
  std::size_t used = 0;
  for (const auto& set : point_sets) {
    if (set.size() < min_pts + 1) {
      continue;
    }
    const auto kd = k_distances(set, min_pts);
    std::vector<double> xs(kd.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      xs[i] = static_cast<double>(i);
    }
    sum += find_knee(xs, kd).y;
    ++used;
  }
  if (used == 0) {
    throw InputError("no point set has more than min_pts = " + std::to_string(min_pts) + " points");
  }
  return sum / static_cast<double>(used);
}

std::string serialize_calibration(const CalibrationResult& r) {
  json cv = json::array();
  for (double v : r.curve.cv_values) {
    cv.push_back(std::isfinite(v) ? json(v) : json(nullptr));
  }
  json excluded = json::array();
  for (const auto& e : r.curve.excluded) {
    excluded.push_back(json::array({e.threshold, e.pair_index}));
  }
  json doc = {{"schema_version", kCalibrationSchemaVersion},
              {"delta", r.selected_delta},
              {"eps", r.eps},
              {"min_pts", r.min_pts},
              {"degenerate_knee", r.degenerate_knee},
              {"curve",
               {{"thresholds", r.curve.thresholds},
                {"cv", std::move(cv)},
                {"pairs", r.curve.pair_count},
                {"excluded", std::move(excluded)}}}};
  require_finite(doc, "");
  return doc.dump(2) + "\n";
}

CalibrationResult parse_calibration(std::string_view text) {
  const json doc = parse_document(text, "calibration");
  const auto version = as_int(require(doc, "", "schema_version"), "schema_version");
  if (version != kCalibrationSchemaVersion) {
    schema_fail("schema_version", "unsupported version " + std::to_string(version));
  }
  CalibrationResult r;
  r.selected_delta = as_number(require(doc, "", "delta"), "delta");
  if (!(r.selected_delta >= 0.0 && r.selected_delta < 1.0)) {
    schema_fail("delta", "must be in [0, 1)");
  }
  r.eps = as_number(require(doc, "", "eps"), "eps");
  if (!(r.eps > 0.0)) {
    schema_fail("eps", "must be > 0");
  }
  r.min_pts = static_cast<int>(as_int(require(doc, "", "min_pts"), "min_pts"));
  if (r.min_pts < 2) {
    schema_fail("min_pts", "must be >= 2");
  }
  if (doc.contains("degenerate_knee")) {
    if (!doc["degenerate_knee"].is_boolean()) {
      schema_fail("degenerate_knee", "expected a boolean");
    }
    r.degenerate_knee = doc["degenerate_knee"].get<bool>();
  }
  if (doc.contains("curve")) {
    const json& c = doc["curve"];
    const json& th = as_array(require(c, "curve", "thresholds"), "curve.thresholds");
    const json& cv = as_array(require(c, "curve", "cv"), "curve.cv");
    if (th.size() != cv.size()) {
      schema_fail("curve.cv", "length differs from curve.thresholds");
    }
    for (std::size_t i = 0; i < th.size(); ++i) {
      r.curve.thresholds.push_back(as_number(th[i], index_path("curve.thresholds", i)));
      r.curve.cv_values.push_back(cv[i].is_null() ? std::numeric_limits<double>::quiet_NaN()
                                                  : as_number(cv[i], index_path("curve.cv", i)));
    }
    if (c.contains("pairs")) {
      r.curve.pair_count = as_count(c["pairs"], "curve.pairs");
    }
    if (c.contains("excluded")) {
      const json& ex = as_array(c["excluded"], "curve.excluded");
      for (std::size_t i = 0; i < ex.size(); ++i) {
        const std::string p = index_path("curve.excluded", i);
        if (!ex[i].is_array() || ex[i].size() != 2) {
          schema_fail(p, "expected [threshold, pair_index]");
        }
        r.curve.excluded.push_back({as_number(ex[i][0], p + "[0]"), as_count(ex[i][1], p + "[1]")});
      }
    }
  }
  return r;
}

void save_calibration(const CalibrationResult& result, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_calibration(result));
}

CalibrationResult load_calibration(const std::filesystem::path& path) {
  try {
    return parse_calibration(read_text_file(path));
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

std::vector<double> threshold_grid(double start, double stop, double step) {
  if (!(step > 0.0) || stop < start) {
    throw InputError("threshold grid needs step > 0 and stop >= start");
  }
  std::vector<double> out;
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
  for (std::size_t i = 0; i <= n; ++i) {
    out.push_back(std::round((start + static_cast<double>(i) * step) * 1e9) / 1e9);
  }
  return out;
}

std::vector<double> default_thresholds() { return threshold_grid(0.0, 0.9, 0.1); }

namespace {

double parse_double(std::string_view s) {
  const std::string str(s);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(str, &used);
  } catch (const std::exception&) {
    throw InputError("not a number: \"" + str + "\"");
  }
  if (used != str.size()) {
    throw InputError("not a number: \"" + str + "\"");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) {
      break;
    }
    start = pos + 1;
  }
  return parts;
}

}  // namespace

std::vector<double> parse_thresholds(std::string_view text) {
  std::vector<double> out;
  if (text.find(':') != std::string_view::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) {
      throw InputError("threshold range must be start:stop:step");
    }
    out = threshold_grid(parse_double(parts[0]), parse_double(parts[1]), parse_double(parts[2]));
  } else {
    for (auto p : split(text, ',')) {
      out.push_back(parse_double(p));
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(out[i] >= 0.0 && out[i] < 1.0) || (i > 0 && out[i] <= out[i - 1])) {
      throw InputError("thresholds must be strictly increasing values in [0, 1)");
    }
  }
  return out;
}

std::vector<CalibrationPair> load_calibration_pairs(const std::filesystem::path& dir) {
  const auto manifest = dir / "pairs.jsonl";
  std::ifstream in(manifest);
  if (!in) {
    throw InputError("missing calibration pair manifest " + manifest.string());
  }
  std::vector<CalibrationPair> pairs;
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
    try {
      CalibrationPair p;
      p.id_a = as_string(require(row, "", "id_a"), "id_a");
      p.id_b = as_string(require(row, "", "id_b"), "id_b");
      p.image_a = read_png(dir / as_string(require(row, "", "file_a"), "file_a"));
      p.image_b = read_png(dir / as_string(require(row, "", "file_b"), "file_b"));
      pairs.push_back(std::move(p));
    } catch (const InputError& e) {
      throw InputError(where + ": " + e.what());
    }
  }
  if (pairs.empty()) {
    throw InputError("calibration pair manifest " + manifest.string() + " lists no pairs");
  }
  return pairs;
}

void write_calibration_pairs(const std::filesystem::path& dir, std::span<const CalibrationPair> pairs) {
  std::filesystem::create_directories(dir / "images");
  std::ostringstream manifest;
  for (const auto& p : pairs) {
    const std::string fa = "images/" + p.id_a + ".png";
    const std::string fb = "images/" + p.id_b + ".png";
    write_png(dir / fa, p.image_a);
    write_png(dir / fb, p.image_b);
    manifest << json{{"id_a", p.id_a}, {"file_a", fa}, {"id_b", p.id_b}, {"file_b", fb}}.dump() << '\n';
  }
  write_file_atomic(dir / "pairs.jsonl", manifest.str());
}

}  // namespace driftwatch
