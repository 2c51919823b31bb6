#pragma once

#include <optional>
#include <span>

#include "replaykey/event_model.hpp"
#include "replaykey/interest_series.hpp"
#include "replaykey/peaks.hpp"

namespace replaykey {

struct AnalysisParams {
  std::optional<int> window_s;  // default from the video's genre
  double min_value = 0.0;
  std::optional<int> max_peaks;  // keep only the top-ranked n
  int lookback_s = kDefaultLookbackS;
};

/// Raw Replay30 series smoothed with params.window_s or the genre default.
ActivitySeries interest_series(std::span<const InteractionEvent> events,
                               const VideoMeta& meta,
                               std::optional<int> window_s);

/// build_replay_series -> smooth -> find_peaks -> rank_peaks ->
/// keyframe_windows. Throws NoPeaks when nothing rises above min_value.
KeyframeResult analyze_keyframes(std::span<const InteractionEvent> events,
                                 const VideoMeta& meta,
                                 const AnalysisParams& params = {});

/// Meta for a video nobody registered: genre Other, duration just long
/// enough to hold every cue (at least 1 s).
VideoMeta infer_meta(const std::string& video_id,
                     std::span<const InteractionEvent> events);

}  // namespace replaykey
