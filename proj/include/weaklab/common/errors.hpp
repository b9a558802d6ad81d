#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace weaklab {

// Root of everything the library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user input. Carries every violation found, not only the first.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::string msg) : Error(msg), violations_{std::move(msg)} {}
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

// Numerical failures. The CLI maps these to exit code 3.
class NumericError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public NumericError {
 public:
  using NumericError::NumericError;
};

class StepSizeError : public NumericError {
 public:
  StepSizeError(double dt, const std::string& detail);
  double dt() const noexcept { return dt_; }

 private:
  double dt_;
};

class NodeSingularity : public NumericError {
 public:
  explicit NodeSingularity(double x);
  double x() const noexcept { return x_; }

 private:
  double x_;
};

class PostSelectionImpossible : public NumericError {
 public:
  explicit PostSelectionImpossible(double x);
};

class HorizonError : public NumericError {
 public:
  HorizonError(const std::string& what, std::size_t count = 1)
      : NumericError(what), count_(count) {}
  std::size_t count() const noexcept { return count_; }

 private:
  std::size_t count_;
};

class BasisCoverageError : public NumericError {
 public:
  explicit BasisCoverageError(double retained);
  double retained() const noexcept { return retained_; }

 private:
  double retained_;
};

class GridRangeError : public NumericError {
 public:
  explicit GridRangeError(double outside_mass);
};

class AncillaGridError : public NumericError {
 public:
  using NumericError::NumericError;
};

class InsufficientStatistics : public NumericError {
 public:
  InsufficientStatistics(double probability, std::size_t n);
  double probability() const noexcept { return probability_; }

 private:
  double probability_;
};

class EmptyEnsembleError : public NumericError {
 public:
  using NumericError::NumericError;
};

class LagError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace weaklab
