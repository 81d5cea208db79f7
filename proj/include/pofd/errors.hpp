#ifndef POFD_ERRORS_HPP
#define POFD_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pofd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument values (bad grid sizes, out-of-domain points, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// The data do not satisfy the structural requirements of an estimator,
/// e.g. a non-interval observation pattern passed to an FTC estimator.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Rank deficiency or other loss of numerical meaning.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Malformed input files. `line()` is 1-based, 0 if unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace pofd

#endif  // POFD_ERRORS_HPP
