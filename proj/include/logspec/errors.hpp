#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace logspec {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

// Estimator configured in a way its calibration does not cover
// (e.g. the log correction with nonuniform taper weights).
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

// A power value too small to take the logarithm of.
class DegenerateSpectrum : public Error {
 public:
  DegenerateSpectrum(const std::string& what, double frequency)
      : Error(what), frequency_(frequency) {}
  double frequency() const noexcept { return frequency_; }

 private:
  double frequency_;
};

// Halfwidth outside [lower, upper]. `index` is the grid point for
// variable-halfwidth smoothing, npos otherwise.
class InvalidHalfwidth : public Error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  InvalidHalfwidth(double h, double lower, double upper, std::size_t index = npos)
      : Error(message(h, lower, upper, index)),
        h_(h),
        lower_(lower),
        upper_(upper),
        index_(index) {}

  double halfwidth() const noexcept { return h_; }
  double lower() const noexcept { return lower_; }
  double upper() const noexcept { return upper_; }
  std::size_t index() const noexcept { return index_; }

 private:
  static std::string message(double h, double lower, double upper, std::size_t index) {
    std::string s = "halfwidth " + std::to_string(h) + " outside admissible interval [" +
                    std::to_string(lower) + ", " + std::to_string(upper) + "]";
    if (index != npos) s += " at grid index " + std::to_string(index);
    return s;
  }

  double h_;
  double lower_;
  double upper_;
  std::size_t index_;
};

class FitDegenerate : public Error {
 public:
  using Error::Error;
};

// Wraps an error from a pipeline stage with the stage label.
class StageError : public Error {
 public:
  StageError(const std::string& stage, const std::string& what)
      : Error(stage + ": " + what), stage_(stage) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace logspec
