#include "replaykey/peaks.hpp"

#include <algorithm>

#include <json.hpp>

#include "replaykey/errors.hpp"

namespace replaykey {

Eigen::VectorXd derivative(const ActivitySeries& series) {
  if (series.size() < 2)
    throw TooShort("derivative needs at least 2 cells");
  return first_difference(series.cells);
}

std::vector<Peak> find_peaks(const ActivitySeries& series, double min_value) {
  const Eigen::Index k = series.size();
  if (k < 3) throw TooShort("peak search needs at least 3 cells");
  const Eigen::VectorXd d = first_difference(series.cells);

  // A rising step into t followed by zero steps, then a falling step:
  // the rising step is d(a-1) > 0, the falling step is d(b) < 0.
  std::vector<Peak> peaks;
  Eigen::Index t = 0;
  while (t < k - 1) {
    if (d(t) <= 0) {
      ++t;
      continue;
    }
    const Eigen::Index a = t + 1;
    Eigen::Index b = a;
    while (b < k - 1 && d(b) == 0) ++b;
    if (b < k - 1 && d(b) < 0) {
      const double value = series.cells(a);
      if (value > min_value)
        peaks.push_back({static_cast<int>((a + b) / 2), value, 0});
    }
    t = b;
  }
  return peaks;
}

std::vector<Peak> rank_peaks(std::span<const Peak> peaks) {
  std::vector<Peak> ranked(peaks.begin(), peaks.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const Peak& x, const Peak& y) {
                     if (x.value != y.value) return x.value > y.value;
                     return x.time_s < y.time_s;
                   });
  for (std::size_t i = 0; i < ranked.size(); ++i)
    ranked[i].rank = static_cast<int>(i + 1);
  return ranked;
}

Peak select_thumbnail(std::span<const Peak> ranked) {
  if (ranked.empty())
    throw NoPeaks("no interest peaks; more replay activity is needed");
  return ranked.front();
}

KeyframeResult keyframe_windows(std::span<const Peak> ranked, int lookback_s) {
  KeyframeResult result;
  result.thumbnail_time_s = select_thumbnail(ranked).time_s;
  result.peaks.assign(ranked.begin(), ranked.end());
  result.windows.reserve(ranked.size());
  for (const auto& p : ranked)
    result.windows.push_back({std::max(0, p.time_s - lookback_s), p.time_s});
  return result;
}

std::string keyframes_to_json(const KeyframeResult& result) {
  nlohmann::ordered_json j;
  j["video_id"] = result.video_id;
  j["thumbnail_time_s"] = result.thumbnail_time_s;
  auto peaks = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < result.peaks.size(); ++i) {
    const auto& p = result.peaks[i];
    nlohmann::ordered_json item;
    item["time_s"] = p.time_s;
    item["value"] = p.value;
    item["rank"] = p.rank;
    item["window"] = {result.windows[i].start_s, result.windows[i].end_s};
    peaks.push_back(std::move(item));
  }
  j["peaks"] = std::move(peaks);
  return j.dump(2);
}

}  // namespace replaykey
