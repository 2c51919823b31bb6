#include "replaykey/cli.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "replaykey/errors.hpp"
#include "replaykey/evaluation.hpp"
#include "replaykey/event_store.hpp"
#include "replaykey/pipeline.hpp"
#include "replaykey/service.hpp"
#include "replaykey/simulation.hpp"

namespace replaykey::cli {

namespace {

// File-level problems (missing or unreadable inputs) are data errors.
struct DataError : Error {
  using Error::Error;
};

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

GroundTruth read_truth(const std::string& path) {
  try {
    return parse_ground_truth(read_text(path));
  } catch (const MalformedRecord& e) {
    throw DataError(path + ": " + e.what());
  }
}

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : fallback_(fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw DataError("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : fallback_; }

 private:
  std::ofstream file_;
  std::ostream& fallback_;
};

std::string keyframes_table(const KeyframeResult& r) {
  std::ostringstream ss;
  ss << "video " << r.video_id << ", thumbnail " << r.thumbnail_time_s << " s\n";
  ss << "rank  time_s  value  window\n";
  for (std::size_t i = 0; i < r.peaks.size(); ++i) {
    const auto& p = r.peaks[i];
    ss << p.rank << "  " << p.time_s << "  " << format_number(p.value) << "  ["
       << r.windows[i].start_s << ", " << r.windows[i].end_s << "]\n";
  }
  return ss.str();
}

std::optional<Genre> genre_option(const std::string& text) {
  if (text.empty()) return std::nullopt;
  auto g = genre_from_string(text);
  if (!g) throw DataError("unknown genre '" + text + "'");
  return g;
}

struct Flags {
  std::string log, store, truth, video, genre, title, out, format = "json", addr;
  bool lenient = false, cors = false;
  int duration = 0;
  std::optional<int> window, max_peaks;
  int lookback = kDefaultLookbackS;
  int tolerance = kDefaultToleranceS;
  double min_peak = 0.0;
  int users = 23;
  std::uint64_t seed = 42;
  double replay_rate = 2.0, seek_noise = 10.0, skip_rate = 3.0;
};

int do_ingest(const Flags& f, std::ostream& out) {
  std::ifstream in(f.log, std::ios::binary);
  if (!in) throw DataError("cannot read " + f.log);
  auto loaded = load_log(in, f.lenient ? LoadMode::Lenient : LoadMode::Strict);

  EventStore store(f.store);
  std::optional<VideoMeta> meta;
  if (!f.truth.empty()) {
    auto truth = read_truth(f.truth);
    meta = VideoMeta{truth.video_id, truth.duration_s, genre_option(f.genre), {}};
  } else if (f.duration > 0) {
    if (f.video.empty()) throw DataError("--duration needs --video");
    meta = VideoMeta{f.video, f.duration, genre_option(f.genre), {}};
  }
  if (meta) {
    if (!f.title.empty()) meta->title = f.title;
    if (store.register_video(*meta) == EventStore::RegisterOutcome::Conflict)
      throw DataError("video '" + meta->video_id +
                      "' is registered with a different duration");
  }
  auto appended = store.append_events(loaded.events);

  nlohmann::ordered_json j;
  j["read"] = loaded.events.size() + loaded.duplicates + loaded.malformed;
  j["accepted"] = appended.accepted;
  j["duplicates"] = loaded.duplicates + appended.duplicates;
  j["malformed"] = loaded.malformed;
  Output o(f.out, out);
  o.stream() << j.dump(2) << "\n";
  return kOk;
}

int do_analyze(const Flags& f, std::ostream& out, std::ostream& err) {
  EventStore store(f.store);
  const auto events = store.snapshot(f.video);
  auto meta = store.meta(f.video);
  if (!meta) {
    if (events.empty()) {
      err << "no replay activity for video '" << f.video
          << "'; collect more interaction data\n";
      return kNoPeaks;
    }
    meta = infer_meta(f.video, events);
  }
  AnalysisParams params;
  params.window_s = f.window;
  params.min_value = f.min_peak;
  params.max_peaks = f.max_peaks;
  params.lookback_s = f.lookback;
  KeyframeResult result;
  try {
    result = analyze_keyframes(events, *meta, params);
  } catch (const NoPeaks& e) {
    err << e.what() << "\n";
    return kNoPeaks;
  }
  Output o(f.out, out);
  if (f.format == "table")
    o.stream() << keyframes_table(result);
  else
    o.stream() << keyframes_to_json(result) << "\n";
  return kOk;
}

int do_evaluate(const Flags& f, std::ostream& out) {
  const auto truth = read_truth(f.truth);
  const std::string video = f.video.empty() ? truth.video_id : f.video;
  if (video != truth.video_id)
    throw DataError("truth file describes '" + truth.video_id + "', not '" + video + "'");

  EventStore store(f.store);
  const auto events = store.snapshot(video);
  VideoMeta meta{video, truth.duration_s, std::nullopt, std::nullopt};
  if (auto registered = store.meta(video)) {
    if (registered->duration_s != truth.duration_s)
      throw DataError("registered duration " + std::to_string(registered->duration_s) +
                      " differs from truth duration " + std::to_string(truth.duration_s));
    meta = *registered;
  }
  if (f.tolerance < 1) throw DataError("--tolerance must be >= 1");
  const auto series = interest_series(events, meta, f.window);
  const auto report = evaluate(series, truth.segments, f.tolerance, f.min_peak);

  Output o(f.out, out);
  if (f.format == "table")
    o.stream() << report_to_table(report);
  else
    o.stream() << report_to_json(report) << "\n";
  return kOk;
}

int do_simulate(const Flags& f, std::ostream& out) {
  SimulationConfig config;
  config.truth = read_truth(f.truth);
  config.n_users = f.users;
  config.seed = f.seed;
  config.replays_per_segment_mean = f.replay_rate;
  config.seek_noise_sigma_s = f.seek_noise;
  config.forward_skip_rate = f.skip_rate;
  const auto events = simulate_sessions(config);
  Output o(f.out, out);
  for (const auto& e : events) o.stream() << serialize_event(e) << "\n";
  return kOk;
}

int do_serve(const Flags& f) {
  ServeOptions options;
  options.store_root = f.store;
  options.cors = f.cors;
  options = parse_listen_address(f.addr, options);
  return serve(options);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Key-frame detection from aggregated viewer replays", "replaykey"};
  app.require_subcommand(1);
  Flags f;
  const std::vector<std::string> formats{"json", "table"};

  auto* ingest = app.add_subcommand("ingest", "Load and deduplicate an event log into a store");
  ingest->add_option("--log", f.log, "Event log (.jsonl)")->required();
  ingest->add_option("--store", f.store, "Store directory")->required();
  ingest->add_flag("--lenient", f.lenient, "Skip malformed lines instead of failing");
  ingest->add_option("--truth", f.truth, "Register the video described by a truth file");
  ingest->add_option("--video", f.video, "Video id to register with --duration");
  ingest->add_option("--duration", f.duration, "Register --video with this duration (s)")
      ->check(CLI::PositiveNumber);
  ingest->add_option("--genre", f.genre, "lecture, howto or other")
      ->check(CLI::IsMember({"lecture", "howto", "other"}));
  ingest->add_option("--title", f.title);
  ingest->add_option("--out", f.out, "Summary output file");

  auto* analyze = app.add_subcommand("analyze", "Rank key frames and pick the thumbnail");
  analyze->add_option("--store", f.store)->required();
  analyze->add_option("--video", f.video)->required();
  analyze->add_option("--window", f.window, "Smoothing window (s); genre default otherwise");
  analyze->add_option("--min-peak", f.min_peak, "Drop peaks at or below this value")
      ->check(CLI::NonNegativeNumber);
  analyze->add_option("--max-peaks", f.max_peaks)->check(CLI::PositiveNumber);
  analyze->add_option("--lookback", f.lookback, "Key-frame window length (s)")
      ->check(CLI::NonNegativeNumber);
  analyze->add_option("--out", f.out);
  analyze->add_option("--format", f.format)->check(CLI::IsMember(formats));

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Compare peaks to ground-truth segments");
  evaluate_cmd->add_option("--store", f.store)->required();
  evaluate_cmd->add_option("--truth", f.truth)->required();
  evaluate_cmd->add_option("--video", f.video, "Defaults to the truth file's video id");
  evaluate_cmd->add_option("--tolerance", f.tolerance, "Detection tolerance (s)");
  evaluate_cmd->add_option("--window", f.window);
  evaluate_cmd->add_option("--min-peak", f.min_peak)->check(CLI::NonNegativeNumber);
  evaluate_cmd->add_option("--out", f.out);
  evaluate_cmd->add_option("--format", f.format)->check(CLI::IsMember(formats));

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic viewer log");
  simulate->add_option("--truth", f.truth)->required();
  simulate->add_option("--users", f.users)->check(CLI::NonNegativeNumber);
  simulate->add_option("--seed", f.seed);
  simulate->add_option("--replay-rate", f.replay_rate, "Mean replays per user and segment");
  simulate->add_option("--seek-noise", f.seek_noise, "Landing noise sigma (s)");
  simulate->add_option("--skip-rate", f.skip_rate, "Mean forward skips per user and segment");
  simulate->add_option("--out", f.out);

  auto* serve_cmd = app.add_subcommand("serve", "Run the ingestion and analysis service");
  serve_cmd->add_option("--addr", f.addr, "Listen address host:port")
      ->envname("REPLAYKEY_ADDR")
      ->default_val("127.0.0.1:8080");
  serve_cmd->add_option("--store", f.store)->envname("REPLAYKEY_STORE")->required();
  serve_cmd->add_flag("--cors", f.cors, "Allow cross-origin requests");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*ingest) return do_ingest(f, out);
    if (*analyze) return do_analyze(f, out, err);
    if (*evaluate_cmd) return do_evaluate(f, out);
    if (*simulate) return do_simulate(f, out);
    if (*serve_cmd) return do_serve(f);
  } catch (const BadConfig& e) {
    err << "error: " << e.what() << "\n";
    return *serve_cmd ? kUsage : kDataError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsage;
}

}  // namespace replaykey::cli
