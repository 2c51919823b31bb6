#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace replaykey::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kDataError = 2,
  kNoPeaks = 3,
};

/// Runs one invocation. `args` excludes the program name. Structured
/// output goes to --out when given, otherwise to `out`; diagnostics go to
/// `err`.
///
///   ingest   --log F --store D [--lenient] [--truth T | --video ID --duration S]
///            [--genre lecture|howto|other] [--title X]
///   analyze  --store D --video ID [--window W] [--min-peak V] [--max-peaks N]
///            [--lookback S] [--out F] [--format json|table]
///   evaluate --store D --truth T [--video ID] [--tolerance 60] [--window W]
///            [--min-peak V] [--out F] [--format json|table]
///   simulate --truth T [--users 23] [--seed 42] [--replay-rate 2]
///            [--seek-noise 10] [--skip-rate 3] [--out F]
///   serve    --addr HOST:PORT --store D [--cors]
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace replaykey::cli
