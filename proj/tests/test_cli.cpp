#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "replaykey/cli.hpp"
#include "replaykey/event_store.hpp"
#include "replaykey/service.hpp"
#include "temp_dir.hpp"

using namespace replaykey;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string kTruth = std::string(REPLAYKEY_FIXTURES) + "/lecture_a_truth.json";

}  // namespace

TEST_CASE("simulate, ingest, evaluate") {
  TempDir dir;
  const auto log = (dir.path() / "log.jsonl").string();
  const auto store = (dir.path() / "store").string();
  const auto report = (dir.path() / "report.json").string();

  REQUIRE(run({"simulate", "--truth", kTruth, "--users", "23", "--seed", "42", "--out", log}).code == 0);
  auto ingest = run({"ingest", "--log", log, "--store", store, "--truth", kTruth, "--genre", "lecture"});
  REQUIRE(ingest.code == 0);
  CHECK(json::parse(ingest.out)["duplicates"] == 0);

  REQUIRE(run({"evaluate", "--store", store, "--truth", kTruth, "--out", report}).code == 0);
  auto j = json::parse(slurp(report));
  CHECK(j["detection_rate"] == 1.0);

  auto table = run({"evaluate", "--store", store, "--truth", kTruth, "--tolerance", "60",
                    "--format", "table"});
  CHECK(table.code == 0);
  CHECK(table.out.find("distance (start) [value]") != std::string::npos);
  CHECK(table.out.find(" (40) [") != std::string::npos);
  CHECK(table.out.find(" (554) [") != std::string::npos);

  // Re-ingesting the same log stores nothing new.
  auto again = run({"ingest", "--log", log, "--store", store});
  CHECK(json::parse(again.out)["accepted"] == 0);
}

TEST_CASE("analyze output matches the service body") {
  TempDir dir;
  const auto log = (dir.path() / "log.jsonl").string();
  const auto store = (dir.path() / "store").string();
  run({"simulate", "--truth", kTruth, "--seed", "7", "--out", log});
  run({"ingest", "--log", log, "--store", store, "--truth", kTruth, "--genre", "lecture"});

  auto analyze = run({"analyze", "--store", store, "--video", "lecture-a", "--max-peaks", "3"});
  REQUIRE(analyze.code == 0);
  EventStore s(store);
  IngestService service(s);
  auto body = service.get_keyframes("lecture-a", {{"max_peaks", "3"}}).body;
  CHECK(analyze.out == body + "\n");

  auto table = run({"analyze", "--store", store, "--video", "lecture-a", "--format", "table"});
  CHECK(table.out.find("rank  time_s  value  window") != std::string::npos);
}

TEST_CASE("analyze on an empty store exits 3") {
  TempDir dir;
  auto r = run({"analyze", "--store", dir.str(), "--video", "nothing"});
  CHECK(r.code == cli::kNoPeaks);
  CHECK(r.err.find("more") != std::string::npos);

  // Registered but silent video is NoPeaks too.
  run({"ingest", "--log", "/dev/null", "--store", dir.str(), "--video", "quiet", "--duration", "90"});
  CHECK(run({"analyze", "--store", dir.str(), "--video", "quiet"}).code == cli::kNoPeaks);
}

TEST_CASE("analyze infers duration for unregistered videos") {
  TempDir dir;
  const auto log = (dir.path() / "log.jsonl").string();
  {
    std::ofstream out(log);
    for (int i = 0; i < 3; ++i)
      out << R"({"v":"1","event_id":"e)" << i
          << R"(","video_id":"clip","user_id":"u","session_id":"s","action":"seek_back_30","cue_time_s":)"
          << 70 + i << R"(,"wall_time":"2024-01-01T00:00:00Z"})" << "\n";
    // The furthest cue sets the inferred duration.
    out << R"({"v":"1","event_id":"p","video_id":"clip","user_id":"u","session_id":"s","action":"play","cue_time_s":199.5,"wall_time":"2024-01-01T00:00:00Z"})"
        << "\n";
  }
  REQUIRE(run({"ingest", "--log", log, "--store", dir.str()}).code == 0);
  auto r = run({"analyze", "--store", dir.str(), "--video", "clip"});
  CHECK(r.code == 0);
  CHECK(json::parse(r.out)["peaks"].size() >= 1);
}

TEST_CASE("usage and data errors") {
  TempDir dir;
  CHECK(run({}).code == cli::kUsage);
  CHECK(run({"frobnicate"}).code == cli::kUsage);
  CHECK(run({"analyze", "--store", dir.str(), "--video", "x", "--bogus"}).code == cli::kUsage);
  CHECK(run({"evaluate", "--store", dir.str(), "--truth", kTruth, "--format", "xml"}).code ==
        cli::kUsage);
  CHECK(run({"--help"}).code == cli::kOk);

  const auto bad_log = (dir.path() / "bad.jsonl").string();
  std::ofstream(bad_log) << R"({"v":"1","event_id":"a","action":"jump"})" << "\n";
  auto bad = run({"ingest", "--log", bad_log, "--store", (dir.path() / "s").string()});
  CHECK(bad.code == cli::kDataError);
  CHECK(bad.err.find("line 1") != std::string::npos);
  auto lenient = run({"ingest", "--log", bad_log, "--store", (dir.path() / "s").string(), "--lenient"});
  CHECK(lenient.code == 0);
  CHECK(json::parse(lenient.out)["malformed"] == 1);

  const auto bad_truth = (dir.path() / "t.json").string();
  std::ofstream(bad_truth) << R"({"video_id":"x","duration_s":10,"segments":[{"label":"a","start_s":5,"end_s":50}]})";
  CHECK(run({"simulate", "--truth", bad_truth}).code == cli::kDataError);
  CHECK(run({"simulate", "--truth", (dir.path() / "missing.json").string()}).code == cli::kDataError);
  CHECK(run({"evaluate", "--store", dir.str(), "--truth", kTruth, "--video", "other"}).code ==
        cli::kDataError);
}

TEST_CASE("serve rejects a bad address") {
  TempDir dir;
  CHECK(run({"serve", "--addr", "nonsense", "--store", dir.str()}).code == cli::kUsage);
}
