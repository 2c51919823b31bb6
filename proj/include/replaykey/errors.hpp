#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace replaykey {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad syntax, missing field, unknown action or out-of-range value in an
// event record or truth file. line() is 1-based when the record came from
// a line-oriented source.
class MalformedRecord : public Error {
 public:
  explicit MalformedRecord(const std::string& what,
                           std::optional<std::size_t> line = std::nullopt)
      : Error(line ? "line " + std::to_string(*line) + ": " + what : what),
        line_(line) {}

  std::optional<std::size_t> line() const { return line_; }

 private:
  std::optional<std::size_t> line_;
};

class VideoMismatch : public Error {
 public:
  using Error::Error;
};

class CueOutOfRange : public Error {
 public:
  using Error::Error;
};

class BadWindow : public Error {
 public:
  using Error::Error;
};

class TooShort : public Error {
 public:
  using Error::Error;
};

// Raised when a series has no peak above the minimum value. Callers that
// need a thumbnail anyway fall back to time 0.
class NoPeaks : public Error {
 public:
  using Error::Error;
};

class SegmentOutOfRange : public Error {
 public:
  using Error::Error;
};

class OverlappingSegments : public Error {
 public:
  using Error::Error;
};

class BadConfig : public Error {
 public:
  using Error::Error;
};

class StorageFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace replaykey
