#include "replaykey/evaluation.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

#include <json.hpp>

#include "replaykey/errors.hpp"

namespace replaykey {

using nlohmann::json;
using nlohmann::ordered_json;

void validate_segments(std::span<const SemanticSegment> segments,
                       int duration_s) {
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    if (s.start_s < 0 || s.start_s >= s.end_s || s.end_s > duration_s)
      throw SegmentOutOfRange("segment '" + s.label + "' [" +
                              std::to_string(s.start_s) + ", " +
                              std::to_string(s.end_s) + ") outside [0, " +
                              std::to_string(duration_s) + "]");
    if (i > 0 && s.start_s < segments[i - 1].end_s)
      throw OverlappingSegments("segment '" + s.label +
                                "' overlaps or precedes '" +
                                segments[i - 1].label + "'");
  }
}

namespace {

int require_int(const json& j, const char* key, const char* where) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number_integer())
    throw MalformedRecord(std::string(where) + ": missing integer '" + key + "'");
  auto v = it->get<long long>();
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw MalformedRecord(std::string(where) + ": '" + key + "' out of range");
  return static_cast<int>(v);
}

}  // namespace

GroundTruth parse_ground_truth(std::string_view text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw MalformedRecord("ground truth is not a JSON object");
  GroundTruth truth;
  auto id = j.find("video_id");
  if (id == j.end() || !id->is_string())
    throw MalformedRecord("ground truth: missing string 'video_id'");
  truth.video_id = id->get<std::string>();
  truth.duration_s = require_int(j, "duration_s", "ground truth");
  if (truth.duration_s < 1)
    throw MalformedRecord("ground truth: duration_s must be >= 1");
  auto segs = j.find("segments");
  if (segs == j.end() || !segs->is_array())
    throw MalformedRecord("ground truth: missing array 'segments'");
  for (const auto& s : *segs) {
    if (!s.is_object()) throw MalformedRecord("segment is not an object");
    auto label = s.find("label");
    if (label == s.end() || !label->is_string())
      throw MalformedRecord("segment: missing string 'label'");
    truth.segments.push_back({label->get<std::string>(),
                              require_int(s, "start_s", "segment"),
                              require_int(s, "end_s", "segment")});
  }
  validate_segments(truth.segments, truth.duration_s);
  return truth;
}

std::string serialize_ground_truth(const GroundTruth& truth) {
  ordered_json j;
  j["video_id"] = truth.video_id;
  j["duration_s"] = truth.duration_s;
  auto segs = ordered_json::array();
  for (const auto& s : truth.segments) {
    ordered_json item;
    item["label"] = s.label;
    item["start_s"] = s.start_s;
    item["end_s"] = s.end_s;
    segs.push_back(std::move(item));
  }
  j["segments"] = std::move(segs);
  return j.dump(2);
}

ActivitySeries build_pulse_series(std::span<const SemanticSegment> segments,
                                  int duration_s) {
  if (duration_s < 1) throw SegmentOutOfRange("duration_s must be >= 1");
  validate_segments(segments, duration_s);
  ActivitySeries series;
  series.kind = SeriesKind::RawReplay;
  series.cells = Eigen::VectorXd::Zero(duration_s);
  for (const auto& s : segments)
    series.cells.segment(s.start_s, s.end_s - s.start_s).setOnes();
  return series;
}

std::vector<MatchRow> match_peaks(std::span<const Peak> peaks,
                                  std::span<const SemanticSegment> segments,
                                  int tolerance_s) {
  std::vector<MatchRow> rows;
  rows.reserve(segments.size());
  for (const auto& s : segments) rows.push_back({s.label, s.start_s, {}, {}, {}, false});

  std::vector<bool> peak_used(peaks.size(), false);
  std::vector<bool> seg_used(segments.size(), false);
  const std::size_t rounds = std::min(peaks.size(), segments.size());
  for (std::size_t round = 0; round < rounds; ++round) {
    // Strict < while scanning in (segment, peak) order keeps the earliest
    // segment and then the earliest peak on ties. Peaks are assumed to be
    // in time order.
    long long best = std::numeric_limits<long long>::max();
    std::size_t best_seg = 0, best_peak = 0;
    for (std::size_t si = 0; si < segments.size(); ++si) {
      if (seg_used[si]) continue;
      for (std::size_t pi = 0; pi < peaks.size(); ++pi) {
        if (peak_used[pi]) continue;
        long long dist = std::llabs(static_cast<long long>(peaks[pi].time_s) -
                                    segments[si].start_s);
        if (dist < best) {
          best = dist;
          best_seg = si;
          best_peak = pi;
        }
      }
    }
    seg_used[best_seg] = true;
    peak_used[best_peak] = true;
    auto& row = rows[best_seg];
    row.peak_time_s = peaks[best_peak].time_s;
    row.signed_distance_s = peaks[best_peak].time_s - segments[best_seg].start_s;
    row.peak_value = peaks[best_peak].value;
    row.detected = best < tolerance_s;
  }
  return rows;
}

EvaluationReport evaluate(const ActivitySeries& series,
                          std::span<const SemanticSegment> segments,
                          int tolerance_s, double min_value) {
  validate_segments(segments, static_cast<int>(series.size()));
  EvaluationReport report;
  report.video_id = series.video_id;
  report.tolerance_s = tolerance_s;

  const auto peaks = find_peaks(series, min_value);
  const auto ranked = rank_peaks(peaks);
  report.rows = match_peaks(peaks, segments, tolerance_s);
  try {
    report.thumbnail_time_s = select_thumbnail(ranked).time_s;
  } catch (const NoPeaks&) {
    report.thumbnail_time_s = 0;
    report.thumbnail_fallback = true;
  }
  for (const auto& r : report.rows) report.detected += r.detected ? 1 : 0;
  report.detection_rate =
      segments.empty() ? 0.0
                       : static_cast<double>(report.detected) /
                             static_cast<double>(segments.size());
  return report;
}

double pooled_detection_rate(std::span<const EvaluationReport> reports) {
  std::size_t detected = 0, total = 0;
  for (const auto& r : reports) {
    detected += static_cast<std::size_t>(r.detected);
    total += r.rows.size();
  }
  return total == 0 ? 0.0
                    : static_cast<double>(detected) / static_cast<double>(total);
}

std::string report_to_json(const EvaluationReport& report) {
  ordered_json j;
  j["video_id"] = report.video_id;
  j["tolerance_s"] = report.tolerance_s;
  j["thumbnail_time_s"] = report.thumbnail_time_s;
  j["thumbnail_fallback"] = report.thumbnail_fallback;
  j["detected"] = report.detected;
  j["segments"] = report.rows.size();
  j["detection_rate"] = report.detection_rate;
  auto rows = ordered_json::array();
  for (const auto& r : report.rows) {
    ordered_json item;
    item["label"] = r.label;
    item["start_s"] = r.start_s;
    item["peak_time_s"] = r.peak_time_s ? ordered_json(*r.peak_time_s) : ordered_json();
    item["signed_distance_s"] =
        r.signed_distance_s ? ordered_json(*r.signed_distance_s) : ordered_json();
    item["peak_value"] = r.peak_value ? ordered_json(*r.peak_value) : ordered_json();
    item["detected"] = r.detected;
    rows.push_back(std::move(item));
  }
  j["rows"] = std::move(rows);
  return j.dump(2);
}

namespace {

std::string format_value(double v) {
  if (std::floor(v) == v && std::abs(v) < 1e15)
    return std::to_string(static_cast<long long>(v));
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace

std::string report_to_table(const EvaluationReport& report) {
  std::vector<std::pair<std::string, std::string>> cells;
  std::size_t label_w = std::string("segment").size();
  for (const auto& r : report.rows) {
    std::string cell =
        r.peak_time_s
            ? std::to_string(*r.signed_distance_s) + " (" +
                  std::to_string(r.start_s) + ") [" + format_value(*r.peak_value) + "]"
            : "- (" + std::to_string(r.start_s) + ") [-]";
    if (r.peak_time_s && !report.thumbnail_fallback &&
        *r.peak_time_s == report.thumbnail_time_s)
      cell += " *";
    label_w = std::max(label_w, r.label.size());
    cells.emplace_back(r.label, std::move(cell));
  }
  std::size_t cell_w = std::string("distance (start) [value]").size();
  for (const auto& c : cells) cell_w = std::max(cell_w, c.second.size());

  std::string out = "video " + report.video_id + ", tolerance " +
                    std::to_string(report.tolerance_s) + " s\n";
  out += pad("segment", label_w) + "  " + pad("distance (start) [value]", cell_w) +
         "  detected\n";
  for (std::size_t i = 0; i < cells.size(); ++i)
    out += pad(cells[i].first, label_w) + "  " + pad(cells[i].second, cell_w) +
           "  " + (report.rows[i].detected ? "yes" : "no") + "\n";

  char rate[32];
  std::snprintf(rate, sizeof rate, "%.1f%%", 100.0 * report.detection_rate);
  out += "detected " + std::to_string(report.detected) + "/" +
         std::to_string(report.rows.size()) + " (" + rate + "), thumbnail " +
         std::to_string(report.thumbnail_time_s) +
         (report.thumbnail_fallback ? " (fallback)" : "") + "\n";
  return out;
}

}  // namespace replaykey
