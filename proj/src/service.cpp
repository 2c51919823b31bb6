#include "replaykey/service.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

// Eigen must be seen before httplib: <resolv.h> defines a `_res` macro
// that clashes with Eigen's product kernels.
#include "replaykey/errors.hpp"
#include "replaykey/pipeline.hpp"

#include <httplib.h>
#include <json.hpp>

namespace replaykey {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

HttpResponse json_response(int status, const ordered_json& body) {
  return {status, body.dump(), "application/json"};
}

HttpResponse error_response(int status, const std::string& message) {
  ordered_json j;
  j["error"] = message;
  return json_response(status, j);
}

struct BadParam {
  std::string message;
};

const std::string* find_param(const QueryParams& q, const std::string& key) {
  auto it = q.find(key);
  return it == q.end() ? nullptr : &it->second;
}

std::optional<int> int_param(const QueryParams& q, const std::string& key) {
  const auto* text = find_param(q, key);
  if (!text) return std::nullopt;
  int v = 0;
  auto [ptr, ec] = std::from_chars(text->data(), text->data() + text->size(), v);
  if (ec != std::errc{} || ptr != text->data() + text->size())
    throw BadParam{"query parameter '" + key + "' must be an integer"};
  return v;
}

std::optional<double> real_param(const QueryParams& q, const std::string& key) {
  const auto* text = find_param(q, key);
  if (!text) return std::nullopt;
  double v = 0;
  auto [ptr, ec] = std::from_chars(text->data(), text->data() + text->size(), v);
  if (ec != std::errc{} || ptr != text->data() + text->size() || !std::isfinite(v))
    throw BadParam{"query parameter '" + key + "' must be a number"};
  return v;
}

AnalysisParams analysis_params(const QueryParams& q) {
  AnalysisParams p;
  p.window_s = int_param(q, "window_s");
  p.min_value = real_param(q, "min_value").value_or(0.0);
  if (p.min_value < 0) throw BadParam{"min_value must be >= 0"};
  p.max_peaks = int_param(q, "max_peaks");
  if (p.max_peaks && *p.max_peaks < 1) throw BadParam{"max_peaks must be >= 1"};
  return p;
}

HttpResponse no_peaks_response() {
  ordered_json j;
  j["thumbnail_time_s"] = 0;
  j["fallback"] = true;
  return json_response(409, j);
}

}  // namespace

HttpResponse IngestService::register_video(const std::string& video_id,
                                           std::string_view body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    return error_response(400, "body must be a JSON object");
  if (auto id = j.find("video_id"); id != j.end()) {
    if (!id->is_string() || id->get<std::string>() != video_id)
      return error_response(400, "video_id in body does not match the path");
  } else {
    j["video_id"] = video_id;
  }
  VideoMeta meta;
  try {
    meta = parse_meta(j.dump());
  } catch (const MalformedRecord& e) {
    return error_response(400, e.what());
  }
  try {
    switch (store_.register_video(meta)) {
      case EventStore::RegisterOutcome::Created:
        return {201, serialize_meta(meta), "application/json"};
      case EventStore::RegisterOutcome::Unchanged:
      case EventStore::RegisterOutcome::Updated:
        return {200, serialize_meta(meta), "application/json"};
      case EventStore::RegisterOutcome::Conflict:
        return error_response(409, "video '" + video_id +
                                       "' already registered with another duration");
    }
  } catch (const StorageFailure& e) {
    return error_response(500, e.what());
  }
  return error_response(500, "unreachable");
}

HttpResponse IngestService::post_events(std::string_view body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded()) return error_response(400, "body is not valid JSON");
  if (!j.is_array()) j = json::array({std::move(j)});
  if (j.size() > kMaxBatchEvents)
    return error_response(413, "batch exceeds " + std::to_string(kMaxBatchEvents) +
                                   " events");

  std::vector<InteractionEvent> events;
  events.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    try {
      events.push_back(parse_event_line(j[i].dump()));
    } catch (const MalformedRecord& e) {
      ordered_json err;
      err["error"] = e.what();
      err["index"] = i;
      return json_response(400, err);
    }
  }
  try {
    auto result = store_.append_events(events);
    ordered_json out;
    out["accepted"] = result.accepted;
    out["duplicates"] = result.duplicates;
    return json_response(202, out);
  } catch (const CueOutOfRange& e) {
    return error_response(400, e.what());
  } catch (const StorageFailure& e) {
    return error_response(500, e.what());
  }
}

HttpResponse IngestService::get_keyframes(const std::string& video_id,
                                          const QueryParams& query) {
  auto meta = store_.meta(video_id);
  if (!meta) return error_response(404, "unknown video '" + video_id + "'");
  try {
    const auto params = analysis_params(query);
    const auto events = store_.snapshot(video_id);
    auto result = analyze_keyframes(events, *meta, params);
    return {200, keyframes_to_json(result), "application/json"};
  } catch (const BadParam& e) {
    return error_response(400, e.message);
  } catch (const NoPeaks&) {
    return no_peaks_response();
  } catch (const Error& e) {
    return error_response(400, e.what());
  }
}

HttpResponse IngestService::get_thumbnail(const std::string& video_id,
                                          const QueryParams& query) {
  auto meta = store_.meta(video_id);
  if (!meta) return error_response(404, "unknown video '" + video_id + "'");
  try {
    auto params = analysis_params(query);
    params.max_peaks = 1;
    const auto events = store_.snapshot(video_id);
    const auto result = analyze_keyframes(events, *meta, params);
    ordered_json j;
    j["video_id"] = video_id;
    j["thumbnail_time_s"] = result.thumbnail_time_s;
    j["value"] = result.peaks.front().value;
    j["window"] = {result.windows.front().start_s, result.windows.front().end_s};
    return json_response(200, j);
  } catch (const BadParam& e) {
    return error_response(400, e.message);
  } catch (const NoPeaks&) {
    return no_peaks_response();
  } catch (const Error& e) {
    return error_response(400, e.what());
  }
}

HttpResponse IngestService::get_series(const std::string& video_id,
                                       const QueryParams& query) {
  auto meta = store_.meta(video_id);
  if (!meta) return error_response(404, "unknown video '" + video_id + "'");
  try {
    const auto* kind = find_param(query, "kind");
    const bool raw = kind && *kind == "raw";
    if (kind && !raw && *kind != "smoothed")
      throw BadParam{"kind must be 'raw' or 'smoothed'"};
    const auto window = int_param(query, "window_s");
    const auto events = store_.snapshot(video_id);
    const auto series = raw ? build_replay_series(events, *meta)
                            : interest_series(events, *meta, window);
    return {200, export_series(series), "text/plain; charset=utf-8"};
  } catch (const BadParam& e) {
    return error_response(400, e.message);
  } catch (const Error& e) {
    return error_response(400, e.what());
  }
}

HttpResponse IngestService::health() const {
  ordered_json j;
  j["status"] = "ok";
  j["videos"] = store_.registered_videos();
  j["events"] = store_.event_count();
  return json_response(200, j);
}

namespace {

QueryParams to_query(const httplib::Params& params) {
  return QueryParams(params.begin(), params.end());
}

void reply(httplib::Response& res, const HttpResponse& r) {
  res.status = r.status;
  res.set_content(r.body, r.content_type);
}

}  // namespace

void install_routes(httplib::Server& server, IngestService& service, bool cors) {
  server.Put(R"(/api/v1/videos/([^/]+))",
             [&service](const httplib::Request& req, httplib::Response& res) {
               reply(res, service.register_video(req.matches[1], req.body));
             });
  server.Post("/api/v1/events",
              [&service](const httplib::Request& req, httplib::Response& res) {
                reply(res, service.post_events(req.body));
              });
  server.Get(R"(/api/v1/videos/([^/]+)/series)",
             [&service](const httplib::Request& req, httplib::Response& res) {
               reply(res, service.get_series(req.matches[1], to_query(req.params)));
             });
  server.Get(R"(/api/v1/videos/([^/]+)/keyframes)",
             [&service](const httplib::Request& req, httplib::Response& res) {
               reply(res, service.get_keyframes(req.matches[1], to_query(req.params)));
             });
  server.Get(R"(/api/v1/videos/([^/]+)/thumbnail)",
             [&service](const httplib::Request& req, httplib::Response& res) {
               reply(res, service.get_thumbnail(req.matches[1], to_query(req.params)));
             });
  server.Get("/healthz", [&service](const httplib::Request&, httplib::Response& res) {
    reply(res, service.health());
  });

  if (cors) {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Methods", "GET, POST, PUT, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.status = 204;
    });
  }
}

ServeOptions parse_listen_address(std::string_view addr, ServeOptions base) {
  const auto colon = addr.rfind(':');
  if (colon == std::string_view::npos)
    throw BadConfig("listen address must look like host:port");
  auto port_text = addr.substr(colon + 1);
  int port = -1;
  auto [ptr, ec] = std::from_chars(port_text.data(),
                                   port_text.data() + port_text.size(), port);
  if (ec != std::errc{} || ptr != port_text.data() + port_text.size() ||
      port < 0 || port > 65535)
    throw BadConfig("bad port in listen address '" + std::string(addr) + "'");
  base.port = port;
  if (colon > 0) base.host = std::string(addr.substr(0, colon));
  return base;
}

int serve(const ServeOptions& options) {
  EventStore store(options.store_root);
  if (store.recovered_malformed() > 0)
    std::fprintf(stderr, "recovery skipped %zu malformed log lines\n",
                 store.recovered_malformed());
  IngestService service(store);
  httplib::Server server;
  install_routes(server, service, options.cors);

  int port = options.port;
  if (port == 0) {
    port = server.bind_to_any_port(options.host);
    if (port < 0) return 1;
  } else if (!server.bind_to_port(options.host, port)) {
    std::fprintf(stderr, "cannot listen on %s:%d\n", options.host.c_str(), port);
    return 1;
  }
  std::printf("listening on %s:%d\n", options.host.c_str(), port);
  std::fflush(stdout);
  return server.listen_after_bind() ? 0 : 1;
}

}  // namespace replaykey
