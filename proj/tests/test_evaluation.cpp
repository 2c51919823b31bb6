#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include <json.hpp>

#include "oracles.hpp"
#include "replaykey/errors.hpp"
#include "replaykey/evaluation.hpp"

using namespace replaykey;

namespace {

std::vector<SemanticSegment> starts_at(const std::vector<int>& starts, int extent = 10) {
  std::vector<SemanticSegment> out;
  for (std::size_t i = 0; i < starts.size(); ++i)
    out.push_back({"S" + std::to_string(i + 1), starts[i], starts[i] + extent});
  return out;
}

std::vector<Peak> peaks_at(const std::vector<int>& times, const std::vector<double>& values) {
  std::vector<Peak> out;
  for (std::size_t i = 0; i < times.size(); ++i) out.push_back({times[i], values[i], 0});
  return out;
}

std::vector<int> distances(const std::vector<MatchRow>& rows) {
  std::vector<int> out;
  for (const auto& r : rows) out.push_back(r.signed_distance_s.value_or(-9999));
  return out;
}

int detected(const std::vector<MatchRow>& rows) {
  int n = 0;
  for (const auto& r : rows) n += r.detected;
  return n;
}

ActivitySeries series_of(const std::vector<double>& cells) {
  ActivitySeries s;
  s.video_id = "v";
  s.kind = SeriesKind::Smoothed;
  s.cells = Eigen::Map<const Eigen::VectorXd>(cells.data(),
                                              static_cast<Eigen::Index>(cells.size()));
  return s;
}

}  // namespace

TEST_CASE("pulse series") {
  auto p = build_pulse_series(std::vector<SemanticSegment>{{"a", 2, 4}}, 6);
  CHECK(p.cells == (Eigen::VectorXd(6) << 0, 0, 1, 1, 0, 0).finished());
  CHECK(build_pulse_series(std::vector<SemanticSegment>{}, 5).cells.isZero());

  std::vector<SemanticSegment> adjacent{{"a", 0, 3}, {"b", 3, 5}};
  CHECK(build_pulse_series(adjacent, 5).cells.sum() == 5);

  CHECK_THROWS_AS(build_pulse_series(std::vector<SemanticSegment>{{"a", 4, 7}}, 6),
                  SegmentOutOfRange);
  CHECK_THROWS_AS(build_pulse_series(std::vector<SemanticSegment>{{"a", 3, 3}}, 6),
                  SegmentOutOfRange);
  CHECK_THROWS_AS(build_pulse_series(std::vector<SemanticSegment>{{"a", 0, 3}, {"b", 2, 4}}, 6),
                  OverlappingSegments);
  CHECK_THROWS_AS(build_pulse_series(std::vector<SemanticSegment>{{"b", 3, 4}, {"a", 0, 2}}, 6),
                  OverlappingSegments);
}

TEST_CASE("pulse mass equals total segment length") {
  std::mt19937_64 rng(21);
  for (int round = 0; round < 200; ++round) {
    const int duration = 10 + static_cast<int>(rng() % 1000);
    std::vector<SemanticSegment> segs;
    int cursor = 0, total = 0;
    while (true) {
      const int gap = static_cast<int>(rng() % 50);
      const int len = 1 + static_cast<int>(rng() % 60);
      if (cursor + gap + len > duration) break;
      segs.push_back({"s", cursor + gap, cursor + gap + len});
      total += len;
      cursor += gap + len;
    }
    CHECK(build_pulse_series(segs, duration).cells.sum() == total);
  }
}

TEST_CASE("signed distances for both reference videos") {
  auto lecture = match_peaks(peaks_at({73, 158, 398, 555}, {10, 10, 9, 13}),
                             starts_at({40, 145, 350, 554}));
  CHECK(distances(lecture) == std::vector<int>{33, 13, 48, 1});
  CHECK(detected(lecture) == 4);

  auto howto = match_peaks(peaks_at({150, 251, 361, 496}, {16, 8, 3, 7}),
                           starts_at({105, 230, 374, 475}));
  CHECK(distances(howto) == std::vector<int>{45, 21, -13, 21});
  CHECK(detected(howto) == 4);
  CHECK(howto[2].peak_value == 3.0);
}

TEST_CASE("matching edge cases") {
  auto none = match_peaks(std::vector<Peak>{}, starts_at({10, 50}));
  REQUIRE(none.size() == 2);
  CHECK_FALSE(none[0].peak_time_s);
  CHECK(detected(none) == 0);

  // Strict tolerance: a distance of exactly 60 is a miss.
  auto edge = match_peaks(peaks_at({160}, {1}), starts_at({100}));
  CHECK(edge[0].signed_distance_s == 60);
  CHECK_FALSE(edge[0].detected);
  CHECK(match_peaks(peaks_at({159}, {1}), starts_at({100}))[0].detected);

  // One peak between two segments goes to the earlier one on a tie.
  auto tie = match_peaks(peaks_at({50}, {1}), starts_at({40, 60}));
  CHECK(tie[0].peak_time_s == 50);
  CHECK_FALSE(tie[1].peak_time_s);

  // Two equidistant peaks: the earlier peak wins.
  auto peak_tie = match_peaks(peaks_at({90, 110}, {1, 1}), starts_at({100}));
  CHECK(peak_tie[0].peak_time_s == 90);

  // One-to-one: more segments than peaks leaves some unmatched.
  auto scarce = match_peaks(peaks_at({100}, {1}), starts_at({95, 100, 300}));
  CHECK(scarce[1].peak_time_s == 100);
  CHECK_FALSE(scarce[0].peak_time_s);
  CHECK_FALSE(scarce[2].peak_time_s);
}

TEST_CASE("matching properties") {
  std::mt19937_64 rng(31);
  for (int round = 0; round < 300; ++round) {
    std::vector<int> starts;
    int cursor = 0;
    const int n_seg = 1 + static_cast<int>(rng() % 5);
    for (int i = 0; i < n_seg; ++i) {
      cursor += 20 + static_cast<int>(rng() % 200);
      starts.push_back(cursor);
    }
    std::set<int> peak_set;
    const int n_peak = static_cast<int>(rng() % 6);
    for (int i = 0; i < n_peak; ++i) peak_set.insert(static_cast<int>(rng() % (cursor + 100)));
    std::vector<int> ptimes(peak_set.begin(), peak_set.end());
    std::vector<double> values(ptimes.size(), 1.0);
    const auto peaks = peaks_at(ptimes, values);
    const auto segs = starts_at(starts, 5);

    auto rows = match_peaks(peaks, segs);
    std::set<int> used;
    std::size_t matched = 0;
    for (const auto& r : rows) {
      if (!r.peak_time_s) continue;
      ++matched;
      CHECK(used.insert(*r.peak_time_s).second);
      CHECK(*r.signed_distance_s == *r.peak_time_s - r.start_s);
    }
    CHECK(matched == std::min(peaks.size(), segs.size()));

    int prev = -1;
    for (int tol : {1, 10, 30, 60, 120, 100000}) {
      int d = detected(match_peaks(peaks, segs, tol));
      CHECK(d >= prev);
      prev = d;
    }
    CHECK(match_peaks(peaks, segs) == match_peaks(peaks, segs));
  }
}

TEST_CASE("greedy agrees with the optimal assignment on well separated peaks") {
  std::mt19937_64 rng(41);
  int disagreements = 0;
  for (int round = 0; round < 300; ++round) {
    std::vector<int> starts, ptimes;
    int cursor = 0;
    const int n = 1 + static_cast<int>(rng() % 5);
    for (int i = 0; i < n; ++i) {
      cursor += 150 + static_cast<int>(rng() % 100);
      starts.push_back(cursor);
      ptimes.push_back(cursor - 20 + static_cast<int>(rng() % 60));
    }
    auto rows = match_peaks(peaks_at(ptimes, std::vector<double>(ptimes.size(), 1)),
                            starts_at(starts, 5));
    long long greedy = 0;
    for (const auto& r : rows) greedy += std::llabs(*r.signed_distance_s);
    disagreements += greedy != oracle::best_assignment_cost(ptimes, starts);
  }
  CHECK(disagreements == 0);

  // Crowded case where greedy is not optimal; the oracle flags it.
  std::vector<int> ptimes{9, 19};
  std::vector<int> starts{0, 10};
  auto rows = match_peaks(peaks_at(ptimes, {1, 1}), starts_at(starts, 5));
  CHECK(rows[1].peak_time_s == 9);
  CHECK(rows[0].peak_time_s == 19);
  CHECK(std::llabs(*rows[0].signed_distance_s) + std::llabs(*rows[1].signed_distance_s) == 20);
  CHECK(oracle::best_assignment_cost(ptimes, starts) == 18);
}

TEST_CASE("evaluate composes detection and thumbnail") {
  std::vector<double> x(100, 0.0);
  x[20] = 1; x[21] = 3; x[22] = 1;
  x[70] = 2; x[71] = 5; x[72] = 2;
  auto report = evaluate(series_of(x), starts_at({15, 60}), 60);
  CHECK(report.detected == 2);
  CHECK(report.detection_rate == 1.0);
  CHECK(report.thumbnail_time_s == 71);
  CHECK_FALSE(report.thumbnail_fallback);

  auto flat = evaluate(series_of(std::vector<double>(50, 0.0)), starts_at({10}), 60);
  CHECK(flat.detected == 0);
  CHECK(flat.detection_rate == 0.0);
  CHECK(flat.thumbnail_fallback);
  CHECK(flat.thumbnail_time_s == 0);

  CHECK_THROWS_AS(evaluate(series_of(std::vector<double>(50, 0.0)), starts_at({45}, 10), 60),
                  SegmentOutOfRange);
}

TEST_CASE("peaks exactly at starts give zero distances") {
  std::vector<double> x(400, 0.0);
  std::vector<int> starts{50, 150, 300};
  for (int s : starts) x[static_cast<std::size_t>(s)] = 4;
  auto report = evaluate(series_of(x), starts_at(starts), 60);
  for (const auto& r : report.rows) CHECK(r.signed_distance_s == 0);
  CHECK(report.detection_rate == 1.0);
}

TEST_CASE("pooled detection over both reference videos") {
  EvaluationReport a, b;
  a.rows = match_peaks(peaks_at({73, 158, 398, 555}, {10, 10, 9, 13}), starts_at({40, 145, 350, 554}));
  b.rows = match_peaks(peaks_at({150, 251, 361, 496}, {16, 8, 3, 7}), starts_at({105, 230, 374, 475}));
  a.detected = detected(a.rows);
  b.detected = detected(b.rows);
  std::vector<EvaluationReport> both{a, b};
  CHECK(pooled_detection_rate(both) == 1.0);
}

TEST_CASE("truth file codec") {
  const std::string text = R"({"video_id":"lec","duration_s":600,"segments":[
      {"label":"S1","start_s":40,"end_s":70},{"label":"S2","start_s":145,"end_s":175}]})";
  auto truth = parse_ground_truth(text);
  CHECK(truth.video_id == "lec");
  CHECK(truth.duration_s == 600);
  REQUIRE(truth.segments.size() == 2);
  CHECK(truth.segments[1] == SemanticSegment{"S2", 145, 175});
  auto again = parse_ground_truth(serialize_ground_truth(truth));
  CHECK(again.segments == truth.segments);

  CHECK_THROWS_AS(parse_ground_truth("{"), MalformedRecord);
  CHECK_THROWS_AS(parse_ground_truth(R"({"video_id":"x","duration_s":10})"), MalformedRecord);
  CHECK_THROWS_AS(parse_ground_truth(
                      R"({"video_id":"x","duration_s":10,"segments":[{"label":"a","start_s":5,"end_s":20}]})"),
                  SegmentOutOfRange);
}

TEST_CASE("report rendering") {
  EvaluationReport r;
  r.video_id = "lecture-a";
  r.rows = match_peaks(peaks_at({73, 158, 398, 555}, {10, 10, 9, 13}), starts_at({40, 145, 350, 554}));
  r.detected = detected(r.rows);
  r.detection_rate = 1.0;
  r.thumbnail_time_s = 555;
  const auto table = report_to_table(r);
  CHECK(table.find("33 (40) [10]") != std::string::npos);
  CHECK(table.find("13 (145) [10]") != std::string::npos);
  CHECK(table.find("48 (350) [9]") != std::string::npos);
  CHECK(table.find("1 (554) [13] *") != std::string::npos);
  CHECK(table.find("detected 4/4 (100.0%)") != std::string::npos);

  auto j = nlohmann::json::parse(report_to_json(r));
  CHECK(j["detection_rate"] == 1.0);
  CHECK(j["rows"][3]["signed_distance_s"] == 1);
  CHECK(j["rows"][3]["peak_time_s"] == 555);

  EvaluationReport empty;
  empty.rows = match_peaks(std::vector<Peak>{}, starts_at({40}));
  empty.thumbnail_fallback = true;
  CHECK(report_to_table(empty).find("- (40) [-]") != std::string::npos);
  CHECK(nlohmann::json::parse(report_to_json(empty))["rows"][0]["peak_time_s"].is_null());
}
