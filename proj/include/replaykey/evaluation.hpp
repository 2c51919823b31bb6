#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "replaykey/interest_series.hpp"
#include "replaykey/peaks.hpp"

namespace replaykey {

// A manually annotated interesting region, [start_s, end_s).
struct SemanticSegment {
  std::string label;
  int start_s = 0;
  int end_s = 0;

  friend bool operator==(const SemanticSegment&,
                         const SemanticSegment&) = default;
};

struct GroundTruth {
  std::string video_id;
  int duration_s = 1;
  std::vector<SemanticSegment> segments;
};

/// Throws SegmentOutOfRange unless 0 <= start < end <= duration for each
/// segment, and OverlappingSegments unless they are sorted and disjoint.
void validate_segments(std::span<const SemanticSegment> segments,
                       int duration_s);

/// Parses the truth file {"video_id", "duration_s", "segments": [{label,
/// start_s, end_s}]}. Throws MalformedRecord on syntax or type errors and
/// the segment errors above on invalid geometry.
GroundTruth parse_ground_truth(std::string_view text);
std::string serialize_ground_truth(const GroundTruth& truth);

/// 0/1 series marking the segments.
ActivitySeries build_pulse_series(std::span<const SemanticSegment> segments,
                                  int duration_s);

struct MatchRow {
  std::string label;
  int start_s = 0;
  std::optional<int> peak_time_s;
  std::optional<int> signed_distance_s;  // peak_time_s - start_s
  std::optional<double> peak_value;
  bool detected = false;

  friend bool operator==(const MatchRow&, const MatchRow&) = default;
};

/// Peak-to-segment distance under which a segment counts as detected.
inline constexpr int kDefaultToleranceS = 60;

/// One-to-one greedy pairing: repeatedly take the (segment, free peak)
/// pair with the smallest |peak - start|, ties to the earlier segment and
/// then the earlier peak. A row is detected when |distance| < tolerance.
/// Rows come back in segment order.
std::vector<MatchRow> match_peaks(std::span<const Peak> peaks,
                                  std::span<const SemanticSegment> segments,
                                  int tolerance_s = kDefaultToleranceS);

struct EvaluationReport {
  std::string video_id;
  std::vector<MatchRow> rows;
  double detection_rate = 0.0;
  int detected = 0;
  int thumbnail_time_s = 0;
  bool thumbnail_fallback = false;  // no peaks, thumbnail defaulted to 0
  int tolerance_s = kDefaultToleranceS;
};

/// Peaks -> ranking -> matching -> report. A series without peaks yields a
/// report with no detections and the time-0 thumbnail fallback.
EvaluationReport evaluate(const ActivitySeries& series,
                          std::span<const SemanticSegment> segments,
                          int tolerance_s = kDefaultToleranceS,
                          double min_value = 0.0);

/// Pools several reports into one detection rate (detected / segments).
double pooled_detection_rate(std::span<const EvaluationReport> reports);

std::string report_to_json(const EvaluationReport& report);

/// Plain-text table, one row per segment in "distance (start) [value]"
/// cell notation. The thumbnail row is starred.
std::string report_to_table(const EvaluationReport& report);

}  // namespace replaykey
