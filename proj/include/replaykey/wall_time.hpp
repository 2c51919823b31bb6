#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace replaykey {

// Absolute UTC instant with microsecond resolution. Parsed from RFC 3339
// text (any offset) and always rendered back in UTC with a `Z` suffix.
struct WallTime {
  std::chrono::sys_time<std::chrono::microseconds> instant{};

  friend bool operator==(const WallTime&, const WallTime&) = default;
  friend auto operator<=>(const WallTime&, const WallTime&) = default;
};

// Returns nullopt when `text` is not a valid RFC 3339 date-time.
// Fractions finer than a microsecond are truncated.
std::optional<WallTime> parse_rfc3339(std::string_view text);

// Canonical form: YYYY-MM-DDTHH:MM:SS[.f{1,6}]Z, trailing fraction zeros
// trimmed.
std::string format_rfc3339(const WallTime& t);

}  // namespace replaykey
