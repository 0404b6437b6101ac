#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qnacf {

/// Invalid argument or malformed input (bad parameter, non-finite value, bad config field).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Index, rank or lag outside its admissible range.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Sample too small (or too degenerate) for the requested estimator.
class DegenerateSampleError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Asymptotic formula requested outside the memory regime where it holds.
class RegimeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Numerical failure: quadrature divergence, non-finite intermediate results.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parse failure in a series or config file, carrying the 1-based line number.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : ValidationError(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace qnacf
