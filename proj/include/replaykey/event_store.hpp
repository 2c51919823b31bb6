#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "replaykey/event_model.hpp"

namespace replaykey {

// Append-only per-video event logs under a root directory:
//
//   <root>/videos/<escaped id>/events.jsonl
//   <root>/videos/<escaped id>/meta.json
//
// Opening a store replays every log through load_log (lenient, so a torn
// final line from a crash is skipped). Appends are serialized per video and
// fsync'ed before append_events returns. Safe to share across threads.
class EventStore {
 public:
  explicit EventStore(std::filesystem::path root);

  EventStore(const EventStore&) = delete;
  EventStore& operator=(const EventStore&) = delete;

  struct AppendResult {
    std::size_t accepted = 0;
    std::size_t duplicates = 0;
  };

  /// Stores events whose event_id is new to the store; repeats (within the
  /// batch or against earlier batches) are skipped. All-or-nothing check
  /// first: throws CueOutOfRange if any event lies beyond a registered
  /// duration. Throws StorageFailure on I/O errors, in which case none of
  /// that video's events from this call are acknowledged.
  AppendResult append_events(std::span<const InteractionEvent> events);

  enum class RegisterOutcome { Created, Unchanged, Updated, Conflict };

  /// Conflict when the id exists with another duration, or when stored
  /// events lie beyond the new duration.
  RegisterOutcome register_video(const VideoMeta& meta);

  std::optional<VideoMeta> meta(const std::string& video_id) const;

  /// Copy of a video's events in arrival order.
  std::vector<InteractionEvent> snapshot(const std::string& video_id) const;

  bool has_events(const std::string& video_id) const;
  std::size_t registered_videos() const;
  std::size_t event_count() const;
  std::size_t recovered_malformed() const { return recovered_malformed_; }
  const std::filesystem::path& root() const { return root_; }

 private:
  struct Video {
    mutable std::shared_mutex mutex;
    std::optional<VideoMeta> meta;
    std::vector<InteractionEvent> events;
    std::filesystem::path dir;
  };

  std::shared_ptr<Video> find(const std::string& video_id) const;
  std::shared_ptr<Video> find_or_create(const std::string& video_id);
  void recover();

  std::filesystem::path root_;
  mutable std::mutex index_mutex_;  // guards videos_, ids_, event_count_
  std::map<std::string, std::shared_ptr<Video>> videos_;
  std::unordered_set<std::string> ids_;
  std::size_t event_count_ = 0;
  std::size_t recovered_malformed_ = 0;
};

// Directory-safe rendering of a video id: [A-Za-z0-9_-] pass through,
// every other byte becomes %XX.
std::string escape_video_id(const std::string& id);

}  // namespace replaykey
