#pragma once

#include <stdexcept>
#include <string>

namespace sma {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a constitutive law.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Phase fraction outside the admissible range of the current branch.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Reversal too close to a range endpoint to open a minor loop.
class DegenerateReversal : public Error {
 public:
  using Error::Error;
};

/// Closure requested with fewer than three nested branches.
class MemoryUnderflow : public Error {
 public:
  using Error::Error;
};

/// Algebraic phase-fraction recovery failed (no bracket or several brackets).
class NoRootError : public Error {
 public:
  using Error::Error;
};

class SingularDenominator : public Error {
 public:
  using Error::Error;
};

/// Jump map could not realize the requested discrete state.
class InconsistentState : public Error {
 public:
  using Error::Error;
};

/// More chained jumps at one time instant than allowed.
class ZenoError : public Error {
 public:
  using Error::Error;
};

class SolverFailure : public Error {
 public:
  using Error::Error;
};

/// FIT index requested against a constant reference signal.
class DegenerateSignal : public Error {
 public:
  using Error::Error;
};

class RankDeficient : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& source, int line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace sma
