#pragma once

#include <stdexcept>
#include <string>

namespace driftsel {

// Failure classes map onto CLI exit codes (config=2, numerical=3, I/O=4).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotPositiveDefinite : public NumericalError {
 public:
  NotPositiveDefinite(std::size_t pivot_index, double pivot)
      : NumericalError("correlation matrix is not positive definite (pivot " +
                       std::to_string(pivot_index) + " = " + std::to_string(pivot) + ")"),
        pivot_index_(pivot_index) {}

  std::size_t pivot_index() const noexcept { return pivot_index_; }

 private:
  std::size_t pivot_index_;
};

class NonFiniteState : public NumericalError {
 public:
  NonFiniteState(std::size_t path, std::size_t step)
      : NumericalError("non-finite state on path " + std::to_string(path) + " at step " +
                       std::to_string(step) + " (explosion or dt too large)"),
        path_(path),
        step_(step) {}

  std::size_t path() const noexcept { return path_; }
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t path_;
  std::size_t step_;
};

class EmptyCollection : public NumericalError {
 public:
  EmptyCollection() : NumericalError("no dimension passes the stability gate") {}
};

class SingularGram : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace driftsel
