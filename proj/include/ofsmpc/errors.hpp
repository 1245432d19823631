#pragma once

#include <stdexcept>
#include <string>

namespace ofsmpc {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Input violates a documented precondition (non-symmetric matrix, value out
/// of range, failed modelling assumption, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class FactorizationError : public Error {
 public:
  using Error::Error;
};

/// An iterative method ran out of iterations.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, double last_residual)
      : Error(what), last_residual_(last_residual) {}
  double last_residual() const { return last_residual_; }

 private:
  double last_residual_;
};

/// A computed set turned out empty. `stage` names the pipeline step
/// (e.g. "input_tightening") and `index` the horizon step when relevant.
class EmptySetError : public Error {
 public:
  EmptySetError(const std::string& stage, int index, const std::string& what)
      : Error(what), stage_(stage), index_(index) {}
  const std::string& stage() const { return stage_; }
  int index() const { return index_; }

 private:
  std::string stage_;
  int index_;
};

/// Internal consistency check failed (a computed bound does not bound, a
/// certificate does not certify).
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace ofsmpc
