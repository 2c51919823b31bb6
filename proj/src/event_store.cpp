#include "replaykey/event_store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "replaykey/errors.hpp"

namespace replaykey {

namespace fs = std::filesystem;

std::string escape_video_id(const std::string& id) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : id) {
    const bool plain = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                       (c >= '0' && c <= '9') || c == '_' || c == '-';
    if (plain) {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += kHex[c >> 4];
      out += kHex[c & 0xF];
    }
  }
  return out;
}

namespace {

void write_all(int fd, const std::string& data, const fs::path& path) {
  const char* p = data.data();
  std::size_t left = data.size();
  while (left > 0) {
    ssize_t n = ::write(fd, p, left);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw StorageFailure("write " + path.string() + ": " + std::strerror(errno));
    }
    p += n;
    left -= static_cast<std::size_t>(n);
  }
}

void append_durable(const fs::path& path, const std::string& data) {
  int fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0)
    throw StorageFailure("open " + path.string() + ": " + std::strerror(errno));
  try {
    write_all(fd, data, path);
    if (::fsync(fd) != 0)
      throw StorageFailure("fsync " + path.string() + ": " + std::strerror(errno));
  } catch (...) {
    ::close(fd);
    throw;
  }
  ::close(fd);
}

void replace_durable(const fs::path& path, const std::string& data) {
  fs::path tmp = path;
  tmp += ".tmp";
  int fd = ::open(tmp.c_str(), O_WRONLY | O_TRUNC | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0)
    throw StorageFailure("open " + tmp.string() + ": " + std::strerror(errno));
  try {
    write_all(fd, data, tmp);
    if (::fsync(fd) != 0)
      throw StorageFailure("fsync " + tmp.string() + ": " + std::strerror(errno));
  } catch (...) {
    ::close(fd);
    throw;
  }
  ::close(fd);
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw StorageFailure("rename " + tmp.string() + ": " + ec.message());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

EventStore::EventStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_ / "videos", ec);
  if (ec)
    throw StorageFailure("cannot create store at " + root_.string() + ": " +
                         ec.message());
  recover();
}

void EventStore::recover() {
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root_ / "videos"))
    if (entry.is_directory()) dirs.push_back(entry.path());
  std::sort(dirs.begin(), dirs.end());

  for (const auto& dir : dirs) {
    std::optional<VideoMeta> meta;
    if (fs::exists(dir / "meta.json")) meta = parse_meta(read_file(dir / "meta.json"));

    std::vector<InteractionEvent> events;
    if (fs::exists(dir / "events.jsonl")) {
      std::ifstream in(dir / "events.jsonl");
      auto loaded = load_log(in, LoadMode::Lenient);
      recovered_malformed_ += loaded.malformed;
      events = std::move(loaded.events);
    }
    if (!meta && events.empty()) continue;

    const std::string id = meta ? meta->video_id : events.front().video_id;
    if (escape_video_id(id) != dir.filename().string()) continue;

    auto video = find_or_create(id);
    video->meta = meta;
    for (auto& e : events) {
      if (e.video_id != id || !ids_.insert(e.event_id).second) continue;
      video->events.push_back(std::move(e));
      ++event_count_;
    }
  }
}

std::shared_ptr<EventStore::Video> EventStore::find(const std::string& id) const {
  std::lock_guard lock(index_mutex_);
  auto it = videos_.find(id);
  return it == videos_.end() ? nullptr : it->second;
}

std::shared_ptr<EventStore::Video> EventStore::find_or_create(const std::string& id) {
  auto& slot = videos_[id];
  if (!slot) {
    slot = std::make_shared<Video>();
    slot->dir = root_ / "videos" / escape_video_id(id);
  }
  return slot;
}

EventStore::AppendResult EventStore::append_events(
    std::span<const InteractionEvent> events) {
  // Group by video, keeping arrival order inside each group.
  std::map<std::string, std::vector<const InteractionEvent*>> by_video;
  for (const auto& e : events) by_video[e.video_id].push_back(&e);

  for (const auto& [id, group] : by_video) {
    auto video = find(id);
    if (!video) continue;
    std::shared_lock lock(video->mutex);
    if (!video->meta) continue;
    for (const auto* e : group)
      if (std::floor(e->cue_time_s) > video->meta->duration_s)
        throw CueOutOfRange("event " + e->event_id + " beyond duration of " + id);
  }

  AppendResult result;
  for (const auto& [id, group] : by_video) {
    std::shared_ptr<Video> video;
    std::vector<const InteractionEvent*> fresh;
    {
      std::lock_guard lock(index_mutex_);
      video = find_or_create(id);
      for (const auto* e : group) {
        if (ids_.insert(e->event_id).second)
          fresh.push_back(e);
        else
          ++result.duplicates;
      }
    }
    if (fresh.empty()) continue;

    std::string data;
    for (const auto* e : fresh) {
      data += serialize_event(*e);
      data += '\n';
    }
    std::unique_lock lock(video->mutex);
    try {
      std::error_code ec;
      fs::create_directories(video->dir, ec);
      if (ec) throw StorageFailure("mkdir " + video->dir.string() + ": " + ec.message());
      append_durable(video->dir / "events.jsonl", data);
    } catch (...) {
      std::lock_guard index_lock(index_mutex_);
      for (const auto* e : fresh) ids_.erase(e->event_id);
      throw;
    }
    for (const auto* e : fresh) video->events.push_back(*e);
    {
      std::lock_guard index_lock(index_mutex_);
      event_count_ += fresh.size();
    }
    result.accepted += fresh.size();
  }
  return result;
}

EventStore::RegisterOutcome EventStore::register_video(const VideoMeta& meta) {
  validate(meta);
  std::shared_ptr<Video> video;
  {
    std::lock_guard lock(index_mutex_);
    video = find_or_create(meta.video_id);
  }
  std::unique_lock lock(video->mutex);
  if (video->meta && video->meta->duration_s != meta.duration_s)
    return RegisterOutcome::Conflict;
  for (const auto& e : video->events)
    if (std::floor(e.cue_time_s) > meta.duration_s) return RegisterOutcome::Conflict;
  if (video->meta == meta) return RegisterOutcome::Unchanged;

  std::error_code ec;
  fs::create_directories(video->dir, ec);
  if (ec) throw StorageFailure("mkdir " + video->dir.string() + ": " + ec.message());
  replace_durable(video->dir / "meta.json", serialize_meta(meta) + "\n");
  const bool existed = video->meta.has_value();
  video->meta = meta;
  return existed ? RegisterOutcome::Updated : RegisterOutcome::Created;
}

std::optional<VideoMeta> EventStore::meta(const std::string& video_id) const {
  auto video = find(video_id);
  if (!video) return std::nullopt;
  std::shared_lock lock(video->mutex);
  return video->meta;
}

std::vector<InteractionEvent> EventStore::snapshot(const std::string& video_id) const {
  auto video = find(video_id);
  if (!video) return {};
  std::shared_lock lock(video->mutex);
  return video->events;
}

bool EventStore::has_events(const std::string& video_id) const {
  auto video = find(video_id);
  if (!video) return false;
  std::shared_lock lock(video->mutex);
  return !video->events.empty();
}

std::size_t EventStore::registered_videos() const {
  std::vector<std::shared_ptr<Video>> all;
  {
    std::lock_guard lock(index_mutex_);
    for (const auto& [id, v] : videos_) all.push_back(v);
  }
  std::size_t n = 0;
  for (const auto& v : all) {
    std::shared_lock lock(v->mutex);
    n += v->meta ? 1 : 0;
  }
  return n;
}

std::size_t EventStore::event_count() const {
  std::lock_guard lock(index_mutex_);
  return event_count_;
}

}  // namespace replaykey
