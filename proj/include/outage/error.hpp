#pragma once

#include <stdexcept>
#include <string>

namespace outage {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text (feeder, evidence, params, truth files).
class ParseError : public Error {
  public:
    ParseError(const std::string& what, int line = 0)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what
                         : what),
          line_(line) {}

    int line() const noexcept { return line_; }

  private:
    int line_;
};

/// Well-formed input that violates a structural invariant.
class ValidationError : public Error {
  public:
    using Error::Error;
};

/// Deterministic factors leave no admissible value for a variable, i.e. the
/// hard evidence is contradictory.
class ZeroSupportError : public Error {
  public:
    using Error::Error;
};

/// Exact enumeration refused because the net has too many unknowns.
class TooLargeError : public Error {
  public:
    using Error::Error;
};

} // namespace outage
