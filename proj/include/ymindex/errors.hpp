#pragma once

#include <stdexcept>
#include <string>

namespace ymindex {

// Base of all library errors; every failure a caller can act on derives from it.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GridMismatch : public Error {
 public:
  GridMismatch() : Error("fields live on different grids") {}
};

// Violated precondition on a numeric parameter (r >= R, lambda <= 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A resampling or support request left the available grid.
class OutOfGrid : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual, int iterations)
      : Error(what), residual_(residual), iterations_(iterations) {}
  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace ymindex
