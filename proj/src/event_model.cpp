#include "replaykey/event_model.hpp"

#include <cmath>
#include <unordered_set>

#include <json.hpp>

#include "replaykey/errors.hpp"

namespace replaykey {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(Action a) {
  switch (a) {
    case Action::Play: return "play";
    case Action::Pause: return "pause";
    case Action::SeekBack30: return "seek_back_30";
    case Action::SeekFwd30: return "seek_fwd_30";
  }
  return "play";
}

std::optional<Action> action_from_string(std::string_view s) {
  if (s == "play") return Action::Play;
  if (s == "pause") return Action::Pause;
  if (s == "seek_back_30") return Action::SeekBack30;
  if (s == "seek_fwd_30") return Action::SeekFwd30;
  return std::nullopt;
}

std::string_view to_string(Genre g) {
  switch (g) {
    case Genre::Lecture: return "lecture";
    case Genre::HowTo: return "howto";
    case Genre::Other: return "other";
  }
  return "other";
}

std::optional<Genre> genre_from_string(std::string_view s) {
  if (s == "lecture") return Genre::Lecture;
  if (s == "howto") return Genre::HowTo;
  if (s == "other") return Genre::Other;
  return std::nullopt;
}

int default_window_s(std::optional<Genre> genre) {
  if (genre == Genre::HowTo) return 45;
  return 60;
}

void validate(const VideoMeta& meta) {
  if (meta.video_id.empty()) throw BadConfig("video_id must not be empty");
  if (meta.duration_s < 1)
    throw BadConfig("duration_s must be >= 1 for video " + meta.video_id);
}

std::string serialize_meta(const VideoMeta& meta) {
  ordered_json j;
  j["video_id"] = meta.video_id;
  j["duration_s"] = meta.duration_s;
  if (meta.genre) j["genre"] = std::string(to_string(*meta.genre));
  if (meta.title) j["title"] = *meta.title;
  return j.dump();
}

VideoMeta parse_meta(std::string_view text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw MalformedRecord("video meta is not a JSON object");
  VideoMeta meta;
  auto id = j.find("video_id");
  auto dur = j.find("duration_s");
  if (id == j.end() || !id->is_string())
    throw MalformedRecord("video meta: missing string 'video_id'");
  if (dur == j.end() || !dur->is_number_integer())
    throw MalformedRecord("video meta: missing integer 'duration_s'");
  meta.video_id = id->get<std::string>();
  auto d = dur->get<long long>();
  if (d < 1 || d > std::numeric_limits<int>::max())
    throw MalformedRecord("video meta: duration_s out of range");
  meta.duration_s = static_cast<int>(d);
  if (auto g = j.find("genre"); g != j.end() && !g->is_null()) {
    if (!g->is_string()) throw MalformedRecord("video meta: genre not text");
    meta.genre = genre_from_string(g->get<std::string>());
    if (!meta.genre)
      throw MalformedRecord("video meta: unknown genre '" +
                            g->get<std::string>() + "'");
  }
  if (auto t = j.find("title"); t != j.end() && !t->is_null()) {
    if (!t->is_string()) throw MalformedRecord("video meta: title not text");
    meta.title = t->get<std::string>();
  }
  if (meta.video_id.empty()) throw MalformedRecord("video meta: empty id");
  return meta;
}

namespace {

std::string require_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw MalformedRecord(std::string("missing key '") + key + "'");
  if (!it->is_string())
    throw MalformedRecord(std::string("key '") + key + "' must be text");
  return it->get<std::string>();
}

}  // namespace

InteractionEvent parse_event_line(std::string_view line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded()) throw MalformedRecord("invalid JSON syntax");
  if (!j.is_object()) throw MalformedRecord("record is not a JSON object");

  if (require_string(j, "v") != kEventSchemaVersion)
    throw MalformedRecord("unsupported schema version");

  InteractionEvent e;
  e.event_id = require_string(j, "event_id");
  e.video_id = require_string(j, "video_id");
  e.user_id = require_string(j, "user_id");
  e.session_id = require_string(j, "session_id");
  if (e.event_id.empty()) throw MalformedRecord("empty event_id");

  auto action_text = require_string(j, "action");
  auto action = action_from_string(action_text);
  if (!action) throw MalformedRecord("unknown action '" + action_text + "'");
  e.action = *action;

  auto cue = j.find("cue_time_s");
  if (cue == j.end()) throw MalformedRecord("missing key 'cue_time_s'");
  if (!cue->is_number()) throw MalformedRecord("cue_time_s must be a number");
  e.cue_time_s = cue->get<double>();
  if (!std::isfinite(e.cue_time_s) || e.cue_time_s < 0.0)
    throw MalformedRecord("cue_time_s must be finite and >= 0");
  // -0.0 compares equal to 0.0 but would not re-serialize byte-identically.
  if (e.cue_time_s == 0.0) e.cue_time_s = 0.0;

  auto wall = parse_rfc3339(require_string(j, "wall_time"));
  if (!wall) throw MalformedRecord("wall_time is not RFC 3339");
  e.wall_time = *wall;
  return e;
}

std::string serialize_event(const InteractionEvent& e) {
  ordered_json j;
  j["v"] = std::string(kEventSchemaVersion);
  j["event_id"] = e.event_id;
  j["video_id"] = e.video_id;
  j["user_id"] = e.user_id;
  j["session_id"] = e.session_id;
  j["action"] = std::string(to_string(e.action));
  j["cue_time_s"] = e.cue_time_s;
  j["wall_time"] = format_rfc3339(e.wall_time);
  return j.dump();
}

namespace {

bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

class Loader {
 public:
  explicit Loader(LoadMode mode) : mode_(mode) {}

  void feed(std::string_view line, std::size_t line_no) {
    if (is_blank(line)) return;
    InteractionEvent e;
    try {
      e = parse_event_line(line);
    } catch (const MalformedRecord& err) {
      if (mode_ == LoadMode::Strict) throw MalformedRecord(err.what(), line_no);
      ++result_.malformed;
      return;
    }
    if (!seen_.insert(e.event_id).second) {
      ++result_.duplicates;
      return;
    }
    result_.events.push_back(std::move(e));
  }

  LoadResult take() { return std::move(result_); }

 private:
  LoadMode mode_;
  std::unordered_set<std::string> seen_;
  LoadResult result_;
};

}  // namespace

LoadResult load_log(std::span<const std::string> lines, LoadMode mode) {
  Loader loader(mode);
  for (std::size_t i = 0; i < lines.size(); ++i) loader.feed(lines[i], i + 1);
  return loader.take();
}

LoadResult load_log(std::istream& in, LoadMode mode) {
  Loader loader(mode);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) loader.feed(line, ++line_no);
  return loader.take();
}

}  // namespace replaykey
