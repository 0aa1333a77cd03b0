#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hcfm {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input: bad arguments, inconsistent shapes, unsupported geometry.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Rejected configuration (maps to CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure (maps to CLI exit code 3).
class NumericalError : public Error {
 public:
  using Error::Error;
};

class SingularMatrixError : public NumericalError {
 public:
  explicit SingularMatrixError(std::size_t pivot)
      : NumericalError("singular matrix: zero pivot at index " + std::to_string(pivot)),
        pivot_(pivot) {}
  std::size_t pivot() const { return pivot_; }

 private:
  std::size_t pivot_;
};

class ConvergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class InstabilityError : public NumericalError {
 public:
  explicit InstabilityError(long step)
      : NumericalError("non-finite or overflowing solution at step " + std::to_string(step)),
        step_(step) {}
  long step() const { return step_; }

 protected:
  InstabilityError(const std::string& what, long step) : NumericalError(what), step_(step) {}

 private:
  long step_;
};

/// Instability during a multi-mesh study; carries the mesh resolution.
class MeshInstabilityError : public InstabilityError {
 public:
  MeshInstabilityError(int n, long step)
      : InstabilityError("non-finite or overflowing solution on mesh n=" + std::to_string(n) +
                             " at step " + std::to_string(step),
                         step),
        n_(n) {}
  int resolution() const { return n_; }

 private:
  int n_;
};

}  // namespace hcfm
