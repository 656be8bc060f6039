#pragma once

#include <stdexcept>
#include <string>

namespace finsler_hj {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ZeroVector : public Error {
 public:
  ZeroVector() : Error("gradient of the dual metric is undefined at q = 0") {}
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

class EmptySource : public Error {
 public:
  EmptySource() : Error("shortest-path source set is empty") {}
};

class InvalidMetric : public Error {
 public:
  using Error::Error;
};

class NonpositiveWeight : public Error {
 public:
  using Error::Error;
};

class IncompatibleData : public Error {
 public:
  using Error::Error;
};

class InfeasibleTestFunction : public Error {
 public:
  using Error::Error;
};

// Malformed input. `field` names the offending key (or is empty), `line` is
// 1-based and 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::string field = {}, std::size_t line = 0)
      : Error(what), field_(std::move(field)), line_(line) {}
  const std::string& field() const { return field_; }
  std::size_t line() const { return line_; }

 private:
  std::string field_;
  std::size_t line_;
};

// Well-formed input that breaks an invariant; the message names it.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Boundary data admit no solution (a compatibility pair is violated).
class IncompatibleSpec : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class MissingArtifact : public Error {
 public:
  using Error::Error;
};

}  // namespace finsler_hj
