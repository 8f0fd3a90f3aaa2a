#ifndef EVASION_ERRORS_HPP_
#define EVASION_ERRORS_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace evasion {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidFrameError : public Error {
 public:
  using Error::Error;
};

class DegenerateGeometryError : public Error {
 public:
  using Error::Error;
};

class InvalidStepError : public Error {
 public:
  using Error::Error;
};

class CommandRangeError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

class ScheduleExhaustedError : public Error {
 public:
  using Error::Error;
};

// Non-finite value produced during simulation or training. `index` is the
// simulation step (or batch digest for training faults).
class NumericFault : public Error {
 public:
  NumericFault(const std::string& what, std::int64_t index)
      : Error(what + " (index " + std::to_string(index) + ")"), index_(index) {}

  std::int64_t index() const { return index_; }

 private:
  std::int64_t index_;
};

// Configuration problem. `key` is the dotted key path, `line` is 0 when the
// error is not tied to a specific line.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& key, int line, const std::string& message)
      : Error(format(key, line, message)), key_(key), line_(line) {}

  const std::string& key() const { return key_; }
  int line() const { return line_; }

 private:
  static std::string format(const std::string& key, int line,
                            const std::string& message) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line) + ": ";
    if (!key.empty()) out += key + ": ";
    return out + message;
  }

  std::string key_;
  int line_;
};

}  // namespace evasion

#endif  // EVASION_ERRORS_HPP_
