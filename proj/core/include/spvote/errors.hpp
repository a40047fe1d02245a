#pragma once

#include <stdexcept>
#include <string>

namespace spvote {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input that violates a documented precondition or data invariant. The CLI
// maps these to exit code 1; every other Error maps to exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Request exceeds the exhaustive-enumeration guard (m <= 10).
class CapacityError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ParameterError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// A lemma or operation is not applicable to the given inputs. Distinct from a
// condition that is evaluated and found false.
class PreconditionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class CoverageError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DegeneratePriorError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, long line = -1, std::string field = {})
      : ValidationError(line >= 0 ? "line " + std::to_string(line) +
                                        (field.empty() ? "" : " field '" + field + "'") + ": " + what
                                  : what),
        line_(line),
        field_(std::move(field)) {}

  long line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  long line_;
  std::string field_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace spvote
