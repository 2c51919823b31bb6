#include "replaykey/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "replaykey/errors.hpp"

namespace replaykey {

double SimRng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double SimRng::normal(double mean, double sigma) {
  // Box-Muller; 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double z =
      std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  return mean + sigma * z;
}

int SimRng::poisson(double mean) {
  // Knuth's product method, in chunks so exp(-chunk) never underflows.
  constexpr double kChunk = 30.0;
  int total = 0;
  while (mean > 0.0) {
    const double part = std::min(mean, kChunk);
    mean -= part;
    const double limit = std::exp(-part);
    double product = uniform();
    while (product > limit) {
      ++total;
      product *= uniform();
    }
  }
  return total;
}

void validate(const SimulationConfig& c) {
  auto rate_ok = [](double r) { return std::isfinite(r) && r >= 0.0; };
  if (c.n_users < 0) throw BadConfig("n_users must be >= 0");
  if (!rate_ok(c.replays_per_segment_mean))
    throw BadConfig("replays_per_segment_mean must be finite and >= 0");
  if (!rate_ok(c.seek_noise_sigma_s))
    throw BadConfig("seek_noise_sigma_s must be finite and >= 0");
  if (!rate_ok(c.forward_skip_rate))
    throw BadConfig("forward_skip_rate must be finite and >= 0");
  if (c.truth.video_id.empty()) throw BadConfig("video_id must not be empty");
  if (c.truth.duration_s < 1) throw BadConfig("duration_s must be >= 1");
  try {
    validate_segments(c.truth.segments, c.truth.duration_s);
  } catch (const Error& e) {
    throw BadConfig(e.what());
  }
}

namespace {

// 2024-01-01T00:00:00Z
constexpr std::chrono::sys_seconds kSessionEpoch{std::chrono::seconds{1704067200}};

class SessionWriter {
 public:
  SessionWriter(const SimulationConfig& c, std::vector<InteractionEvent>& out)
      : config_(c), out_(out) {}

  void begin(int user, std::size_t segment) {
    user_ = user;
    segment_ = segment;
    counter_ = 0;
  }

  void emit(Action action, double cue) {
    const double duration = config_.truth.duration_s;
    cue = std::clamp(std::round(std::clamp(cue, 0.0, duration) * 1000.0) / 1000.0,
                     0.0, duration);
    InteractionEvent e;
    const std::string session =
        "sim-" + std::to_string(config_.seed) + "-u" + std::to_string(user_);
    e.event_id = session + "-s" + std::to_string(segment_) + "-" +
                 std::to_string(counter_);
    e.video_id = config_.truth.video_id;
    e.user_id = "user-" + std::to_string(user_);
    e.session_id = session;
    e.action = action;
    e.cue_time_s = cue;
    e.wall_time.instant = kSessionEpoch + std::chrono::hours{user_} +
                          std::chrono::minutes{5 * segment_} +
                          std::chrono::seconds{counter_};
    ++counter_;
    out_.push_back(std::move(e));
  }

 private:
  const SimulationConfig& config_;
  std::vector<InteractionEvent>& out_;
  int user_ = 0;
  std::size_t segment_ = 0;
  int counter_ = 0;
};

}  // namespace

std::vector<InteractionEvent> simulate_sessions(const SimulationConfig& config) {
  validate(config);
  std::vector<InteractionEvent> events;
  SimRng rng(config.seed);
  SessionWriter writer(config, events);
  const double sigma = config.seek_noise_sigma_s;

  for (int user = 0; user < config.n_users; ++user) {
    for (std::size_t g = 0; g < config.truth.segments.size(); ++g) {
      const auto& seg = config.truth.segments[g];
      writer.begin(user, g);
      writer.emit(Action::Play, 0.0);

      const int skips = rng.poisson(config.forward_skip_rate);
      const double interior =
          seg.start_s + rng.uniform() * static_cast<double>(seg.end_s - seg.start_s);
      const double landing = interior + rng.normal(0.0, sigma);
      for (int i = 0; i < skips; ++i)
        writer.emit(Action::SeekFwd30,
                    landing - static_cast<double>(kReplaySpanS) * (skips - i));

      const int replays = rng.poisson(config.replays_per_segment_mean);
      for (int i = 0; i < replays; ++i)
        writer.emit(Action::SeekBack30,
                    seg.start_s + kReplaySpanS + rng.normal(0.0, sigma));
    }
  }
  return events;
}

}  // namespace replaykey
