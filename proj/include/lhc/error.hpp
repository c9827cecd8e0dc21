#pragma once

#include <stdexcept>
#include <string>

namespace lhc {

/// Base class for every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A model object violates one of its construction invariants
/// (indefinite covariance, negative intensity, shape mismatch, ...).
class ModelError : public Error {
 public:
  using Error::Error;
};

/// A function was evaluated outside the region where it is finite.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Hypothesis H1 cannot be satisfied: a short spread is non-positive or a
/// recovery rate is not below one.
class H1InfeasibleError : public Error {
 public:
  H1InfeasibleError(int rating, double time, const std::string& what)
      : Error(what), rating_(rating), time_(time) {}

  int rating() const { return rating_; }
  double time() const { return time_; }

 private:
  int rating_;
  double time_;
};

/// The requested computation is not defined for the supplied inputs.
class UnsupportedModeError : public Error {
 public:
  using Error::Error;
};

/// Scenario parsing or validation failed. `where` holds the field path and
/// the message reads "<source>:<line>: <field path>: <detail>".
class ScenarioError : public Error {
 public:
  ScenarioError(std::string where, const std::string& what) : Error(what), where_(std::move(where)) {}

  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

}  // namespace lhc
