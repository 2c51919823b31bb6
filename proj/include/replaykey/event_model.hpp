#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "replaykey/wall_time.hpp"

namespace replaykey {

enum class Action { Play, Pause, SeekBack30, SeekFwd30 };

// Wire names: "play", "pause", "seek_back_30", "seek_fwd_30".
std::string_view to_string(Action a);
std::optional<Action> action_from_string(std::string_view s);

struct InteractionEvent {
  std::string event_id;
  std::string video_id;
  std::string user_id;
  std::string session_id;
  Action action = Action::Play;
  double cue_time_s = 0.0;  // player position when the action fired
  WallTime wall_time;

  friend bool operator==(const InteractionEvent&,
                         const InteractionEvent&) = default;
};

enum class Genre { Lecture, HowTo, Other };

std::string_view to_string(Genre g);
std::optional<Genre> genre_from_string(std::string_view s);

// Default moving-average width for a genre: lectures 60 s, how-to 45 s,
// anything else 60 s.
int default_window_s(std::optional<Genre> genre);

struct VideoMeta {
  std::string video_id;
  int duration_s = 1;
  std::optional<Genre> genre;
  std::optional<std::string> title;

  friend bool operator==(const VideoMeta&, const VideoMeta&) = default;
};

// Throws BadConfig when duration_s < 1 or the id is empty.
void validate(const VideoMeta& meta);

// JSON object {"video_id", "duration_s", "genre"?, "title"?}. Genre text is
// "lecture", "howto" or "other".
std::string serialize_meta(const VideoMeta& meta);
VideoMeta parse_meta(std::string_view text);  // throws MalformedRecord

/// Schema version written into every event record.
inline constexpr std::string_view kEventSchemaVersion = "1";

/// Parses one JSONL record. Unknown keys are ignored.
/// Throws MalformedRecord on bad syntax, a missing or mistyped key, a
/// negative or non-finite cue time, an unknown action or a bad wall_time.
InteractionEvent parse_event_line(std::string_view line);

/// Emits one record (no trailing newline) with keys in canonical order:
/// v, event_id, video_id, user_id, session_id, action, cue_time_s, wall_time.
std::string serialize_event(const InteractionEvent& e);

enum class LoadMode { Strict, Lenient };

struct LoadResult {
  std::vector<InteractionEvent> events;  // first-occurrence order
  std::size_t duplicates = 0;
  std::size_t malformed = 0;  // lenient mode only
};

/// Reads a line sequence, skipping blank lines and dropping repeated
/// event_ids (first occurrence wins). Strict mode throws MalformedRecord
/// carrying the 1-based line number of the first bad line.
LoadResult load_log(std::span<const std::string> lines,
                    LoadMode mode = LoadMode::Strict);
LoadResult load_log(std::istream& in, LoadMode mode = LoadMode::Strict);

}  // namespace replaykey
