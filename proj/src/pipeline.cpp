#include "replaykey/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "replaykey/errors.hpp"

namespace replaykey {

ActivitySeries interest_series(std::span<const InteractionEvent> events,
                               const VideoMeta& meta,
                               std::optional<int> window_s) {
  const auto raw = build_replay_series(events, meta);
  // An explicit window is validated as given; the genre default shrinks to
  // fit videos shorter than itself.
  return smooth(raw, window_s.value_or(
                         std::min(default_window_s(meta.genre), meta.duration_s)));
}

KeyframeResult analyze_keyframes(std::span<const InteractionEvent> events,
                                 const VideoMeta& meta,
                                 const AnalysisParams& params) {
  if (params.max_peaks && *params.max_peaks < 1)
    throw BadConfig("max_peaks must be >= 1");
  if (params.lookback_s < 0) throw BadConfig("lookback_s must be >= 0");
  const auto series = interest_series(events, meta, params.window_s);
  auto ranked = rank_peaks(find_peaks(series, params.min_value));
  if (params.max_peaks && ranked.size() > static_cast<std::size_t>(*params.max_peaks))
    ranked.resize(static_cast<std::size_t>(*params.max_peaks));
  auto result = keyframe_windows(ranked, params.lookback_s);
  result.video_id = meta.video_id;
  return result;
}

VideoMeta infer_meta(const std::string& video_id,
                     std::span<const InteractionEvent> events) {
  VideoMeta meta;
  meta.video_id = video_id;
  meta.genre = Genre::Other;
  double max_cue = 0.0;
  for (const auto& e : events) max_cue = std::max(max_cue, e.cue_time_s);
  meta.duration_s = std::max(1, static_cast<int>(std::ceil(max_cue)));
  return meta;
}

}  // namespace replaykey
