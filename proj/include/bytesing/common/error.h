#ifndef BYTESING_COMMON_ERROR_H_
#define BYTESING_COMMON_ERROR_H_

#include <stdexcept>
#include <string>

namespace bytesing {

// Base of every error thrown by the library. `kind()` is a stable short tag
// used by the CLI for machine-readable error lines.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, int line)
      : Error("parse", message + " (line " + std::to_string(line) + ")"),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message)
      : Error("validation", message) {}
};

class LookupError : public Error {
 public:
  explicit LookupError(const std::string& message) : Error("lookup", message) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error("config", message) {}
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& message) : Error("shape", message) {}
};

// Non-finite loss or activation. Carries the step/sample index when known.
class NumericError : public Error {
 public:
  NumericError(const std::string& message, long index)
      : Error("numeric", message + " at index " + std::to_string(index)),
        index_(index) {}
  long index() const { return index_; }

 private:
  long index_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("io", message) {}
};

}  // namespace bytesing

#endif  // BYTESING_COMMON_ERROR_H_
