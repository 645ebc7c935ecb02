#ifndef HOPEWAVE_ERROR_HPP
#define HOPEWAVE_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hopewave {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Bad user input: malformed files, invalid parameters, unknown options.
class InputError : public Error {
public:
  using Error::Error;
};

/// Text or JSON parse failure. Carries the 1-based line number (0 if unknown).
class ParseError : public InputError {
public:
  ParseError(std::size_t line, const std::string& what)
      : InputError(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Tensor or configuration shapes that do not agree.
class ShapeError : public Error {
public:
  using Error::Error;
};

/// Numerical failure (non-convergence, non-finite values, singular systems).
class NumericError : public Error {
public:
  using Error::Error;
};

/// Checkpoint format version that this build does not understand.
class VersionError : public InputError {
public:
  VersionError(int found, int expected)
      : InputError("checkpoint version mismatch: file has version " + std::to_string(found) +
                   ", this build reads version " + std::to_string(expected)),
        found_(found), expected_(expected) {}

  int found() const noexcept { return found_; }
  int expected() const noexcept { return expected_; }

private:
  int found_;
  int expected_;
};

/// An internal invariant was violated. Indicates a bug rather than bad input.
class InvariantError : public Error {
public:
  using Error::Error;
};

}  // namespace hopewave

#endif
