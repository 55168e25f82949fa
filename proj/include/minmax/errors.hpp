#pragma once

#include <stdexcept>
#include <string>

namespace minmax {

// Base for every error raised by the library. The CLI maps the subclasses
// onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Vector or matrix dimensions do not agree with the game.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf encountered, or a quantity that is mathematically undefined.
class NumericError : public Error {
 public:
  using Error::Error;
};

// A direct linear solve hit a (numerically) singular system.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double rcond) : Error(what), rcond_(rcond) {}
  double rcond() const noexcept { return rcond_; }

 private:
  double rcond_;
};

// The requested operation is not defined for this game kind or input.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace minmax
