#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "replaykey/interest_series.hpp"

namespace replaykey {

struct Peak {
  int time_s = 0;
  double value = 0.0;
  int rank = 0;  // 0 until rank_peaks assigns 1..n

  friend bool operator==(const Peak&, const Peak&) = default;
};

struct KeyframeWindow {
  int start_s = 0;
  int end_s = 0;  // the peak time

  friend bool operator==(const KeyframeWindow&, const KeyframeWindow&) = default;
};

struct KeyframeResult {
  std::string video_id;
  std::vector<Peak> peaks;  // rank order
  std::vector<KeyframeWindow> windows;  // parallel to peaks
  int thumbnail_time_s = 0;
};

/// Default look-back from a peak to the likely start of its segment.
inline constexpr int kDefaultLookbackS = 60;

/// d(t) = x(t+1) - x(t), as an Eigen expression.
template <typename Derived>
auto first_difference(const Eigen::MatrixBase<Derived>& x) {
  return x.tail(x.size() - 1) - x.head(x.size() - 1);
}

/// First difference of the series cells (length k-1). Throws TooShort for
/// fewer than 2 cells.
Eigen::VectorXd derivative(const ActivitySeries& series);

/// Local maxima where the derivative turns from positive to negative.
/// A flat top a..b counts when cells(a-1) < cells(a) and cells(b) >
/// cells(b+1) and is reported at floor((a+b)/2). Runs touching either end
/// of the series never qualify; peaks with value <= min_value are dropped.
/// Result is in time order with rank 0. Throws TooShort for k < 3.
std::vector<Peak> find_peaks(const ActivitySeries& series,
                             double min_value = 0.0);

/// Value descending, earlier time first on ties, ranks 1..n.
std::vector<Peak> rank_peaks(std::span<const Peak> peaks);

/// Rank-1 peak. Throws NoPeaks on empty input.
Peak select_thumbnail(std::span<const Peak> ranked);

/// One window [max(0, t - lookback_s), t] per ranked peak plus the
/// thumbnail time. Throws NoPeaks on empty input.
KeyframeResult keyframe_windows(std::span<const Peak> ranked,
                                int lookback_s = kDefaultLookbackS);

/// {"video_id", "thumbnail_time_s", "peaks": [{time_s, value, rank,
/// window: [start, end]}]}
std::string keyframes_to_json(const KeyframeResult& result);

}  // namespace replaykey
