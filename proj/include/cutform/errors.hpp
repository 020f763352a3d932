#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cutform {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Mesh connectivity is not a 2-manifold (an edge with more than two cells).
class TopologyError : public Error {
 public:
  using Error::Error;
};

/// A dual-number operation hit a point where the derivative does not exist.
class SingularDerivative : public Error {
 public:
  using Error::Error;
};

/// A level set violates the cut preconditions (zero nodal value, sign flip
/// under a probe perturbation).
class AssumptionViolation : public Error {
 public:
  AssumptionViolation(const std::string& what, int node = -1)
      : Error(what), node_(node) {}
  int node() const noexcept { return node_; }

 private:
  int node_;
};

class NotCutError : public Error {
 public:
  using Error::Error;
};

/// Degenerate geometric quantity (vanishing gradient, tangential crossing).
class DegenerateGeometry : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  SolverError(const std::string& what, std::vector<double> residuals = {})
      : Error(what), residuals_(std::move(residuals)) {}
  const std::vector<double>& residual_history() const noexcept { return residuals_; }

 private:
  std::vector<double> residuals_;
};

class PartitionIntegrityError : public Error {
 public:
  using Error::Error;
};

/// A computed quantity is NaN or infinite.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace cutform
