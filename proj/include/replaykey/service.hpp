#pragma once

#include <atomic>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>

#include "replaykey/event_store.hpp"

namespace httplib {
class Server;
}

namespace replaykey {

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

using QueryParams = std::multimap<std::string, std::string>;

/// Largest event batch accepted by one POST.
inline constexpr std::size_t kMaxBatchEvents = 10'000;

// HTTP-agnostic handlers over a shared EventStore. Every handler is safe
// to call from concurrent request threads.
class IngestService {
 public:
  explicit IngestService(EventStore& store) : store_(store) {}

  HttpResponse register_video(const std::string& video_id, std::string_view body);
  HttpResponse post_events(std::string_view body);
  HttpResponse get_keyframes(const std::string& video_id, const QueryParams& query);
  HttpResponse get_thumbnail(const std::string& video_id, const QueryParams& query);
  HttpResponse get_series(const std::string& video_id, const QueryParams& query);
  HttpResponse health() const;

 private:
  EventStore& store_;
};

/// Wires the routes:
///   PUT  /api/v1/videos/{id}
///   POST /api/v1/events
///   GET  /api/v1/videos/{id}/series
///   GET  /api/v1/videos/{id}/keyframes
///   GET  /api/v1/videos/{id}/thumbnail
///   GET  /healthz
/// With `cors`, every response allows any origin and OPTIONS preflights
/// are answered.
void install_routes(httplib::Server& server, IngestService& service, bool cors);

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string store_root = "replaykey-store";
  bool cors = false;
};

/// Parses "host:port" (or ":port"). Throws BadConfig.
ServeOptions parse_listen_address(std::string_view addr, ServeOptions base = {});

/// Opens the store and serves until the process is stopped. Returns a
/// non-zero code if the listener cannot bind.
int serve(const ServeOptions& options);

}  // namespace replaykey
