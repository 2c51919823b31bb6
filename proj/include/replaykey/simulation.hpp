#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "replaykey/evaluation.hpp"
#include "replaykey/event_model.hpp"

namespace replaykey {

// Seeded generator for the simulator. Wraps mt19937_64, whose output
// sequence is fixed by the standard, and implements its own uniform,
// normal and Poisson draws so that logs are identical across standard
// library implementations.
class SimRng {
 public:
  explicit SimRng(std::uint64_t seed) : engine_(seed) {}

  double uniform();                  // [0, 1)
  double normal(double mean, double sigma);
  int poisson(double mean);

 private:
  std::mt19937_64 engine_;
};

struct SimulationConfig {
  int n_users = 23;
  double replays_per_segment_mean = 2.0;
  double seek_noise_sigma_s = 10.0;
  double forward_skip_rate = 3.0;
  std::uint64_t seed = 42;
  GroundTruth truth;  // video id, duration and segments being hunted
};

/// Throws BadConfig on negative or non-finite rates, negative user count
/// or invalid segments.
void validate(const SimulationConfig& config);

/// Synthetic viewers. For every (user, segment): a Play at cue 0, a
/// Poisson(forward_skip_rate) run of SeekFwd30 presses ending at a noisy
/// landing point inside the segment, then Poisson(replays_per_segment_mean)
/// SeekBack30 presses near start + 30 + noise. Cues are clamped to
/// [0, duration] and rounded to milliseconds. Same config, same log.
std::vector<InteractionEvent> simulate_sessions(const SimulationConfig& config);

}  // namespace replaykey
