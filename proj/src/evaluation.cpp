#include "driftwatch/evaluation.hpp"

#include <algorithm>
#include <sstream>

#include "driftwatch/atomic_file.hpp"
#include "driftwatch/errors.hpp"
#include "json_fields.hpp"

namespace driftwatch {

using namespace detail;

GroundTruth parse_truth(std::string_view text) {
  const json doc = parse_document(text, "truth");
  const json& frames = require(doc, "", "frames");
  if (!frames.is_object()) {
    schema_fail("frames", "expected an object");
  }
  GroundTruth truth;
  for (auto it = frames.begin(); it != frames.end(); ++it) {
    const std::string path = "frames." + it.key();
    const json& boxes = as_array(it.value(), path);
    auto& out = truth.frames[it.key()];
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      out.push_back(rect_from_json(boxes[i], index_path(path, i)));
    }
  }
  return truth;
}

std::string serialize_truth(const GroundTruth& truth) {
  json frames = json::object();
  for (const auto& [id, boxes] : truth.frames) {
    json list = json::array();
    for (const auto& b : boxes) {
      list.push_back(rect_to_json(b));
    }
    frames[id] = std::move(list);
  }
  return json{{"frames", std::move(frames)}}.dump(2) + "\n";
}

GroundTruth load_truth(const std::filesystem::path& path) {
  try {
    return parse_truth(read_text_file(path));
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

void save_truth(const GroundTruth& truth, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_truth(truth));
}

bool frame_correct(const PairReport& pair, const std::vector<RectMask>& truth, FrameRule rule) {
  const bool reported = !pair.regions.empty();
  const bool anomalous = !truth.empty();
  if (reported != anomalous) {
    return false;
  }
  if (!anomalous || rule == FrameRule::presence) {
    return true;
  }
  return std::any_of(pair.regions.begin(), pair.regions.end(), [&](const AnomalyRegion& r) {
    return std::any_of(truth.begin(), truth.end(), [&](const RectMask& t) { return r.bbox.intersects(t); });
  });
}

Evaluation evaluate(const AnomalyReport& report, const GroundTruth& truth, FrameRule rule) {
  std::vector<const PairReport*> order;
  for (const auto& p : report.pairs) {
    if (!truth.frames.contains(p.query_id)) {
      throw InputError("query \"" + p.query_id + "\" has no ground-truth entry");
    }
    order.push_back(&p);
  }
  std::stable_sort(order.begin(), order.end(),
                   [](const PairReport* a, const PairReport* b) { return a->timestamp < b->timestamp; });

  Evaluation ev;
  std::size_t correct = 0;
  std::size_t anomalous = 0;
  std::size_t anomalous_correct = 0;
  std::size_t reported = 0;
  std::size_t reported_correct = 0;
  for (const auto* p : order) {
    const auto& boxes = truth.frames.at(p->query_id);
    FrameResult fr{p->query_id, p->timestamp, frame_correct(*p, boxes, rule), p->regions.size(), boxes.size(), 0.0};
    correct += fr.correct;
    if (boxes.empty()) {
      ++ev.clean_frames;
      ev.false_positive_frames += !p->regions.empty();
    } else {
      ++anomalous;
      anomalous_correct += fr.correct;
    }
    if (!p->regions.empty()) {
      ++reported;
      reported_correct += fr.correct;
    }
    fr.running_accuracy = static_cast<double>(correct) / static_cast<double>(ev.frames.size() + 1);
    ev.frames.push_back(std::move(fr));
  }
  auto ratio = [](std::size_t a, std::size_t b) { return b ? static_cast<double>(a) / static_cast<double>(b) : 0.0; };
  ev.accuracy = ratio(correct, ev.frames.size());
  ev.recall = ratio(anomalous_correct, anomalous);
  ev.precision = ratio(reported_correct, reported);
  return ev;
}

std::string evaluation_csv(const Evaluation& evaluation) {
  std::ostringstream out;
  out << "query_id,timestamp,correct,regions,truth_boxes\n";
  for (const auto& f : evaluation.frames) {
    out << f.query_id << ',' << json(f.timestamp).dump() << ',' << (f.correct ? 1 : 0) << ',' << f.regions << ','
        << f.truth_boxes << '\n';
  }
  return out.str();
}

}  // namespace driftwatch
