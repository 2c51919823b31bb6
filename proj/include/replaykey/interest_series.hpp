#pragma once

#include <optional>
#include <span>
#include <string>

#include <Eigen/Core>

#include "replaykey/event_model.hpp"

namespace replaykey {

enum class SeriesKind { RawReplay, Smoothed };

// Per-second activity over a video: cells(t) belongs to video second t.
struct ActivitySeries {
  std::string video_id;
  SeriesKind kind = SeriesKind::RawReplay;
  Eigen::VectorXd cells;
  std::optional<int> smoothing_window_s;  // set iff kind == Smoothed

  Eigen::Index size() const { return cells.size(); }
};

/// Seconds a single GoBackward press re-covers.
inline constexpr int kReplaySpanS = 30;

/// Builds the aggregated Replay30 counts. Each SeekBack30 at cue t adds one
/// to cells floor(t)-30 .. floor(t)-1, clamped at 0. Other actions add
/// nothing.
///
/// Throws VideoMismatch for an event of another video and CueOutOfRange
/// when floor(t) > meta.duration_s.
ActivitySeries build_replay_series(std::span<const InteractionEvent> events,
                                   const VideoMeta& meta);

/// Centered, edge-truncated moving average of `values`: output(t) is the
/// mean of values over [t - w/2, t + ceil(w/2) - 1] clipped to the array.
/// Works on any dense vector expression.
template <typename Derived>
Eigen::VectorXd moving_average(const Eigen::MatrixBase<Derived>& values,
                               Eigen::Index window) {
  const Eigen::Index k = values.size();
  Eigen::VectorXd prefix(k + 1);
  prefix(0) = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) prefix(i + 1) = prefix(i) + values(i);

  const Eigen::Index before = window / 2;
  const Eigen::Index after = window - before - 1;
  Eigen::VectorXd out(k);
  for (Eigen::Index t = 0; t < k; ++t) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, t - before);
    const Eigen::Index hi = std::min<Eigen::Index>(k - 1, t + after);
    out(t) = (prefix(hi + 1) - prefix(lo)) / static_cast<double>(hi - lo + 1);
  }
  return out;
}

/// Smooths a RawReplay series. Throws BadWindow unless
/// 1 <= window_s <= series length.
ActivitySeries smooth(const ActivitySeries& series, int window_s);

/// Tab-separated export: "# <video_id> <raw|smoothed> <window|->" then one
/// "t<TAB>value" line per cell.
std::string export_series(const ActivitySeries& series);

// Shortest decimal text that parses back to exactly `v`.
std::string format_number(double v);

}  // namespace replaykey
