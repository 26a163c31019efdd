#include "cli.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <memory>

#include <CLI11.hpp>
#include <json.hpp>

#include "driftwatch/atomic_file.hpp"
#include "driftwatch/calibration.hpp"
#include "driftwatch/errors.hpp"
#include "driftwatch/evaluation.hpp"
#include "driftwatch/pipeline.hpp"
#include "driftwatch/remote.hpp"
#include "driftwatch/scripted_backend.hpp"
#include "driftwatch/synthgen.hpp"
#include "plot.hpp"

namespace driftwatch::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct BackendFlags {
  std::string backend = "native";
  std::string fixture;
  std::string service = "http://127.0.0.1:8080";
  double timeout = 30.0;
  std::size_t max_keypoints = NativeOptions{}.max_keypoints;
  int corner_threshold = NativeOptions{}.corner_threshold;
  std::string segmenter = "auto";
};

struct CalibrateFlags {
  std::string pairs;
  std::string out;
  std::string thresholds = "0.0:0.9:0.1";
  std::size_t min_pts = 5;
  double eps = 0.0;
};

struct ScanFlags {
  std::string reference;
  std::string query;
  std::string calib;
  std::string out;
  std::size_t jobs = 1;
  double max_distance = PairingConfig{}.max_distance;
  double max_yaw = PairingConfig{}.max_yaw_diff;
  std::size_t min_matches = kDefaultMinMatches;
  std::string removal_scope = "all";
  double min_instance_score = 0.0;
};

struct EvaluateFlags {
  std::string report;
  std::string truth;
  std::string out;
  std::string rule = "bbox";
};

struct GenFlags {
  std::string spec;
  std::string out;
};

struct PlotFlags {
  std::string curve;
  std::string accuracy;
  std::string out;
};

void add_backend_flags(CLI::App& sub, BackendFlags& f) {
  sub.add_option("--backend", f.backend, "Feature backend: native, scripted or remote")
      ->check(CLI::IsMember({"native", "scripted", "remote"}))
      ->capture_default_str();
  sub.add_option("--fixture", f.fixture, "Fixture file for the scripted backend");
  sub.add_option("--service", f.service, "Inference service base address for the remote backend")
      ->capture_default_str();
  sub.add_option("--timeout", f.timeout, "Remote call timeout in seconds")->capture_default_str();
  sub.add_option("--max-keypoints", f.max_keypoints, "Native backend keypoint cap")->capture_default_str();
  sub.add_option("--corner-threshold", f.corner_threshold, "Native backend corner contrast")->capture_default_str();
  sub.add_option("--segmenter", f.segmenter, "Segmentation provider: auto, none, scripted or remote")
      ->check(CLI::IsMember({"auto", "none", "scripted", "remote"}))
      ->capture_default_str();
}

std::string env_name(const std::string& long_name) {
  std::string env = kEnvPrefix;
  for (char c : long_name) {
    env += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return env;
}

void attach_env(CLI::App& sub) {
  for (auto* opt : sub.get_options()) {
    const auto& names = opt->get_lnames();
    if (!names.empty() && names.front() != "help" && names.front() != "config") {
      opt->envname(env_name(names.front()));
    }
  }
}

BackendConfig backend_config(const BackendFlags& f, double threshold) {
  BackendConfig cfg;
  cfg.kind = parse_backend_kind(f.backend);
  cfg.match_threshold = threshold;
  cfg.fixture = f.fixture;
  cfg.native.max_keypoints = f.max_keypoints;
  cfg.native.corner_threshold = f.corner_threshold;
  cfg.remote.base_url = f.service;
  cfg.remote.timeout_seconds = f.timeout;
  cfg.validate();
  return cfg;
}

struct ProviderSet {
  std::unique_ptr<FeatureBackend> features;
  std::unique_ptr<SegmentationProvider> segmenter;
};

ProviderSet make_providers(const BackendFlags& f, double threshold) {
  const BackendConfig cfg = backend_config(f, threshold);
  ProviderSet set;
  std::shared_ptr<const ScriptedFixture> fixture;
  if (cfg.kind == BackendKind::scripted || f.segmenter == "scripted") {
    if (f.fixture.empty()) {
      throw InputError("--fixture is required for scripted providers");
    }
    fixture = std::make_shared<const ScriptedFixture>(ScriptedFixture::load(f.fixture));
  }
  switch (cfg.kind) {
    case BackendKind::native:
      set.features = make_feature_backend(cfg);
      break;
    case BackendKind::scripted:
      set.features = std::make_unique<ScriptedBackend>(fixture);
      break;
    case BackendKind::remote:
      set.features = std::make_unique<RemoteBackend>(cfg.remote);
      break;
  }
  std::string seg = f.segmenter;
  if (seg == "auto") {
    seg = cfg.kind == BackendKind::native ? "none" : std::string(to_string(cfg.kind));
  }
  if (seg == "none") {
    set.segmenter = std::make_unique<NullSegmenter>();
  } else if (seg == "scripted") {
    set.segmenter = std::make_unique<ScriptedSegmenter>(fixture);
  } else {
    set.segmenter = std::make_unique<RemoteSegmenter>(cfg.remote);
  }
  return set;
}

int cmd_calibrate(const CalibrateFlags& c, const BackendFlags& b, std::ostream& out, std::ostream& err) {
  const auto thresholds = parse_thresholds(c.thresholds);
  if (c.min_pts < 2) {
    throw InputError("--min-pts must be >= 2");
  }
  const auto pairs = load_calibration_pairs(c.pairs);
  if (pairs.size() < 3) {
    err << "warning: only " << pairs.size() << " calibration pair(s); 3 or more give a steadier curve\n";
  }
  const auto providers = make_providers(b, thresholds.front());

  CalibrationResult result;
  result.curve = sweep(pairs, thresholds, *providers.features);
  const KneeResult k = knee(result.curve);
  result.selected_delta = k.x;
  result.degenerate_knee = k.degenerate;
  result.min_pts = static_cast<int>(c.min_pts);
  if (k.degenerate) {
    err << "warning: cv curve has no knee; using the smallest threshold\n";
  }
  if (c.eps > 0.0) {
    result.eps = c.eps;
  } else {
    std::vector<std::vector<Point2>> sets;
    for (const auto& p : pairs) {
      std::vector<Point2> pts;
      for (const auto& kp : providers.features->extract(p.id_b, p.image_b).keypoints) {
        pts.push_back(kp.point());
      }
      sets.push_back(std::move(pts));
    }
    result.eps = calibrate_eps(sets, c.min_pts);
  }
  save_calibration(result, c.out);

  out << "threshold  cv            defined_pairs\n";
  for (std::size_t i = 0; i < result.curve.thresholds.size(); ++i) {
    const auto& row = result.curve.per_pair[i];
    const auto defined = std::count_if(row.begin(), row.end(), [](const PairStats& s) { return s.defined; });
    out << std::fixed << std::setprecision(2) << std::setw(9) << result.curve.thresholds[i] << "  "
        << std::setprecision(10) << std::setw(12) << result.curve.cv_values[i] << "  " << defined << "/"
        << row.size() << (i == k.index ? "  <- knee" : "") << '\n';
  }
  out << std::setprecision(6) << "delta " << result.selected_delta << "\neps " << result.eps << "\nmin_pts "
      << result.min_pts << '\n';
  return kExitOk;
}

int cmd_scan(const ScanFlags& s, const BackendFlags& b, std::ostream& out) {
  const CalibrationResult calibration = load_calibration(s.calib);
  const RunDataset reference = load_run(s.reference, RunRole::reference);
  const RunDataset query = load_run(s.query, RunRole::query);

  PipelineConfig cfg;
  cfg.pairing = {s.max_distance, s.max_yaw};
  cfg.min_matches = s.min_matches;
  cfg.removal_scope = s.removal_scope == "anomalous" ? RemovalScope::anomalous_only : RemovalScope::all_instances;
  cfg.min_instance_score = s.min_instance_score;
  cfg.jobs = s.jobs;

  const auto providers = make_providers(b, calibration.selected_delta);
  const AnomalyReport report =
      run_mission(reference, query, cfg, calibration, {*providers.features, *providers.segmenter});
  save_report(report, s.out);

  std::size_t counts[4] = {0, 0, 0, 0};
  std::size_t regions = 0;
  std::size_t frames_with_regions = 0;
  for (const auto& p : report.pairs) {
    ++counts[static_cast<int>(p.status)];
    regions += p.regions.size();
    frames_with_regions += !p.regions.empty();
  }
  out << "pairs " << report.pairs.size() << "\nok " << counts[0] << "\nunpaired " << counts[1] << "\nno_overlap "
      << counts[2] << "\nbackend_error " << counts[3] << "\nframes_with_regions " << frames_with_regions
      << "\nregions " << regions << '\n';
  return kExitOk;
}

int cmd_evaluate(const EvaluateFlags& e, std::ostream& out) {
  const AnomalyReport report = load_report(e.report);
  const GroundTruth truth = load_truth(e.truth);
  const Evaluation ev = evaluate(report, truth, e.rule == "presence" ? FrameRule::presence : FrameRule::bbox_intersection);
  write_file_atomic(e.out, evaluation_csv(ev));
  out << std::fixed << std::setprecision(4) << "frames " << ev.frames.size() << "\naccuracy " << ev.accuracy
      << "\nrecall " << ev.recall << "\nprecision " << ev.precision << "\nfalse_positive_frames "
      << ev.false_positive_frames << "/" << ev.clean_frames << '\n';
  return kExitOk;
}

int cmd_gen(const GenFlags& g, std::ostream& out) {
  const MissionSpec spec = parse_mission_spec(read_text_file(g.spec));
  generate_mission(spec, g.out);
  out << "wrote " << spec.frames << " frames (" << spec.anomaly_frames << " with anomalies) and "
      << spec.calibration_pairs << " calibration pairs to " << g.out << '\n';
  return kExitOk;
}

int cmd_plot(const PlotFlags& p, std::ostream& out) {
  if (p.curve.empty() == p.accuracy.empty()) {
    throw InputError("plot needs exactly one of --curve or --accuracy");
  }
  fs::path csv_path = p.out;
  csv_path.replace_extension(".csv");
  if (csv_path == fs::path(p.out)) {
    throw InputError("--out must not be a .csv path; the CSV twin is written beside it");
  }
  const fs::path input = p.curve.empty() ? fs::path(p.accuracy) : fs::path(p.curve);
  if (fs::weakly_canonical(csv_path) == fs::weakly_canonical(input)) {
    throw InputError("the CSV twin " + csv_path.string() + " would overwrite the input; choose another --out name");
  }
  std::string svg;
  std::string csv;
  if (!p.curve.empty()) {
    const auto cal = load_calibration(p.curve);
    svg = plot::curve_svg(cal);
    csv = plot::curve_csv(cal);
  } else {
    const auto rows = plot::parse_accuracy_csv(read_text_file(p.accuracy));
    svg = plot::accuracy_svg(rows);
    csv = plot::accuracy_csv(rows);
  }
  write_file_atomic(p.out, svg);
  write_file_atomic(csv_path, csv);
  out << "wrote " << p.out << " and " << csv_path.string() << '\n';
  return kExitOk;
}

std::string config_value(const json& v) {
  if (v.is_string()) {
    return v.get<std::string>();
  }
  if (v.is_boolean()) {
    return v.get<bool>() ? "true" : "false";
  }
  if (v.is_number()) {
    return v.dump();
  }
  throw InputError("config values must be strings, numbers or booleans");
}

bool given_on_command_line(const std::vector<std::string>& args, const std::string& flag) {
  return std::any_of(args.begin(), args.end(),
                     [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
}

// Splices settings from the --config file into the argument list for options
// that neither the command line nor the environment already set.
std::vector<std::string> apply_config_file(CLI::App& app, std::vector<std::string> args) {
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    }
  }
  if (config_path.empty()) {
    if (const char* env = std::getenv(env_name("config").c_str())) {
      config_path = env;
    }
  }
  if (config_path.empty()) {
    return args;
  }

  auto sub_pos = std::find_if(args.begin(), args.end(), [&](const std::string& a) {
    return app.get_subcommand_no_throw(a) != nullptr;
  });
  CLI::App* sub = sub_pos == args.end() ? nullptr : app.get_subcommand(*sub_pos);

  json doc;
  try {
    doc = json::parse(read_text_file(config_path));
  } catch (const json::parse_error& e) {
    throw InputError("config " + config_path + ": invalid JSON (" + e.what() + ")");
  }
  if (!doc.is_object()) {
    throw InputError("config " + config_path + " must be a JSON object");
  }

  std::vector<std::string> injected;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    std::string key = it.key();
    std::replace(key.begin(), key.end(), '_', '-');
    const std::string flag = "--" + key;
    const auto subs = app.get_subcommands({});
    const bool known = std::any_of(subs.begin(), subs.end(),
                                   [&](const CLI::App* s) { return s->get_option_no_throw(flag) != nullptr; }) ||
                       key == "verbose";
    if (!known) {
      throw InputError("config " + config_path + ": unknown key \"" + it.key() + "\"");
    }
    const CLI::Option* opt = sub ? sub->get_option_no_throw(flag) : nullptr;
    if (key == "verbose") {
      if (it.value().is_boolean() && it.value().get<bool>() && !given_on_command_line(args, "--verbose")) {
        args.insert(args.begin(), "--verbose");
        sub_pos = std::find_if(args.begin(), args.end(), [&](const std::string& a) {
          return app.get_subcommand_no_throw(a) != nullptr;
        });
      }
      continue;
    }
    if (!opt || given_on_command_line(args, flag) || std::getenv(opt->get_envname().c_str()) != nullptr) {
      continue;
    }
    injected.push_back(flag);
    injected.push_back(config_value(it.value()));
  }
  if (sub_pos != args.end()) {
    args.insert(sub_pos + 1, injected.begin(), injected.end());
  }
  return args;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reference-versus-query visual change detection for inspection robots", "driftwatch"};
  app.require_subcommand(1);
  // Global options may follow the subcommand too.
  app.fallthrough();
  std::string config_path;
  bool verbose = false;
  app.add_option("--config", config_path, "JSON file of default settings (flags and environment override it)");
  app.add_flag("-v,--verbose", verbose, "Echo the effective configuration");

  BackendFlags backend;
  CalibrateFlags calibrate;
  ScanFlags scan;
  EvaluateFlags evaluate_flags;
  GenFlags gen;
  PlotFlags plot_flags;

  auto* c = app.add_subcommand("calibrate", "Select the matching threshold and clustering radius from shifted pairs");
  c->add_option("--pairs", calibrate.pairs, "Calibration pair directory (pairs.jsonl)")->required();
  c->add_option("--out", calibrate.out, "Calibration file to write")->required();
  c->add_option("--thresholds", calibrate.thresholds, "start:stop:step or comma list")->capture_default_str();
  c->add_option("--min-pts", calibrate.min_pts, "DBSCAN minimum neighbourhood size")->capture_default_str();
  c->add_option("--eps", calibrate.eps, "Fixed clustering radius in pixels (0 = calibrate)")->capture_default_str();
  add_backend_flags(*c, backend);

  auto* s = app.add_subcommand("scan", "Detect anomalies in a query run against a reference run");
  s->add_option("--reference", scan.reference, "Reference run directory")->required();
  s->add_option("--query", scan.query, "Query run directory")->required();
  s->add_option("--calib", scan.calib, "Calibration file")->required();
  s->add_option("--out", scan.out, "Report file to write")->required();
  s->add_option("--jobs", scan.jobs, "Pairs processed concurrently")->check(CLI::PositiveNumber)->capture_default_str();
  s->add_option("--max-distance", scan.max_distance, "Pairing distance threshold in meters")->capture_default_str();
  s->add_option("--max-yaw", scan.max_yaw, "Pairing heading threshold in radians")->capture_default_str();
  s->add_option("--min-matches", scan.min_matches, "Matches needed to form an overlap mask")->capture_default_str();
  s->add_option("--removal-scope", scan.removal_scope, "Unmatched points removed before clustering: all or anomalous")
      ->check(CLI::IsMember({"all", "anomalous"}))
      ->capture_default_str();
  s->add_option("--min-instance-score", scan.min_instance_score, "Ignore instances scored below this")
      ->capture_default_str();
  add_backend_flags(*s, backend);

  auto* e = app.add_subcommand("evaluate", "Score a report against ground truth");
  e->add_option("--report", evaluate_flags.report, "Report file")->required();
  e->add_option("--truth", evaluate_flags.truth, "Ground-truth file")->required();
  e->add_option("--out", evaluate_flags.out, "Per-frame CSV to write")->required();
  e->add_option("--rule", evaluate_flags.rule, "Frame rule: bbox or presence")
      ->check(CLI::IsMember({"bbox", "presence"}))
      ->capture_default_str();

  auto* g = app.add_subcommand("gen", "Generate a synthetic mission");
  g->add_option("--spec", gen.spec, "Mission spec JSON")->required();
  g->add_option("--out", gen.out, "Output directory")->required();

  auto* p = app.add_subcommand("plot", "Render a calibration curve or accuracy series to SVG (plus CSV twin)");
  p->add_option("--curve", plot_flags.curve, "Calibration file");
  p->add_option("--accuracy", plot_flags.accuracy, "Evaluation CSV");
  p->add_option("--out", plot_flags.out, "SVG file to write")->required();

  for (auto* sub : {c, s, e, g, p}) {
    attach_env(*sub);
  }

  try {
    std::vector<std::string> args = apply_config_file(app, raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kExitOk : kExitInput;
  } catch (const InputError& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitInput;
  }

  if (verbose) {
    err << "# effective configuration\n" << app.config_to_str(true, false);
  }

  try {
    if (c->parsed()) {
      return cmd_calibrate(calibrate, backend, out, err);
    }
    if (s->parsed()) {
      return cmd_scan(scan, backend, out);
    }
    if (e->parsed()) {
      return cmd_evaluate(evaluate_flags, out);
    }
    if (g->parsed()) {
      return cmd_gen(gen, out);
    }
    return cmd_plot(plot_flags, out);
  } catch (const BackendError& ex) {
    err << "backend error: " << ex.what() << '\n';
    return kExitBackend;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitInput;
  } catch (const std::exception& ex) {
    err << "internal error: " << ex.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace driftwatch::cli
