#pragma once

#include <stdexcept>
#include <string>

namespace cvp {

// Process exit codes shared by the CLI.
enum class ExitCode : int {
  kOk = 0,
  kInputError = 2,
  kValidationError = 3,
  kDivergence = 4,
  kIterationCap = 5,
};

/// Base class; carries the exit code the CLI reports for it.
class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ExitCode code() const { return code_; }

 private:
  ExitCode code_;
};

/// Unreadable or malformed input files.
class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(ExitCode::kInputError, what) {}
};

/// Inputs that parse but violate a precondition (class coverage, shapes).
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ExitCode::kValidationError, what) {}
};

/// A class with no scribbled pixels.
class MissingScribbles : public ValidationError {
 public:
  explicit MissingScribbles(int cls)
      : ValidationError("missing scribbles for class " + std::to_string(cls)), cls_(cls) {}
  int missing_class() const { return cls_; }

 private:
  int cls_;
};

/// Non-finite iterate inside the inner solver.
class NumericalDivergence : public Error {
 public:
  NumericalDivergence(int outer, int inner)
      : Error(ExitCode::kDivergence, "non-finite iterate at outer iteration " + std::to_string(outer) +
                                         ", inner iteration " + std::to_string(inner)),
        outer_(outer),
        inner_(inner) {}
  int outer() const { return outer_; }
  int inner() const { return inner_; }

 private:
  int outer_;
  int inner_;
};

}  // namespace cvp
