#include "replaykey/interest_series.hpp"

#include <charconv>
#include <cmath>

#include "replaykey/errors.hpp"

namespace replaykey {

ActivitySeries build_replay_series(std::span<const InteractionEvent> events,
                                   const VideoMeta& meta) {
  validate(meta);
  ActivitySeries series;
  series.video_id = meta.video_id;
  series.kind = SeriesKind::RawReplay;
  series.cells = Eigen::VectorXd::Zero(meta.duration_s);

  for (const auto& e : events) {
    if (e.video_id != meta.video_id)
      throw VideoMismatch("event " + e.event_id + " belongs to video '" +
                          e.video_id + "', expected '" + meta.video_id + "'");
    const double cue = std::floor(e.cue_time_s);
    if (cue > meta.duration_s)
      throw CueOutOfRange("event " + e.event_id + " cue " +
                          format_number(e.cue_time_s) + " beyond duration " +
                          std::to_string(meta.duration_s));
    if (e.action != Action::SeekBack30) continue;

    const auto end = static_cast<Eigen::Index>(cue);
    const auto begin = std::max<Eigen::Index>(0, end - kReplaySpanS);
    series.cells.segment(begin, end - begin).array() += 1.0;
  }
  return series;
}

ActivitySeries smooth(const ActivitySeries& series, int window_s) {
  if (window_s < 1 || window_s > series.size())
    throw BadWindow("window " + std::to_string(window_s) +
                    " s outside [1, " + std::to_string(series.size()) + "]");
  ActivitySeries out;
  out.video_id = series.video_id;
  out.kind = SeriesKind::Smoothed;
  out.smoothing_window_s = window_s;
  out.cells = window_s == 1 ? series.cells
                            : moving_average(series.cells, window_s);
  return out;
}

std::string format_number(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

std::string export_series(const ActivitySeries& series) {
  std::string out = "# " + series.video_id +
                    (series.kind == SeriesKind::RawReplay ? " raw " : " smoothed ") +
                    (series.smoothing_window_s
                         ? std::to_string(*series.smoothing_window_s)
                         : std::string("-")) +
                    "\n";
  for (Eigen::Index t = 0; t < series.size(); ++t) {
    out += std::to_string(t);
    out += '\t';
    out += format_number(series.cells(t));
    out += '\n';
  }
  return out;
}

}  // namespace replaykey
