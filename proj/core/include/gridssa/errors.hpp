#pragma once

#include <stdexcept>
#include <string>

namespace gridssa {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed case/dataset/model text: carries 1-based line and column.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error(what + " (line " + std::to_string(line) + ", column " +
              std::to_string(column) + ")"),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Structurally well-formed input that violates a data invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Versioned binary/text payload problems: bad magic, version, truncation.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Iterative method failed: singular Jacobian, eigensolver stall, etc.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class SingularJacobianError : public NumericalError {
 public:
  SingularJacobianError(int iteration)
      : NumericalError("singular Jacobian at iteration " +
                       std::to_string(iteration)),
        iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

class DisconnectedNetworkError : public Error {
 public:
  using Error::Error;
};

/// A branch outage that separates a generator from the rest of the grid.
class IslandingError : public Error {
 public:
  explicit IslandingError(int branch)
      : Error("outage of branch " + std::to_string(branch) +
              " islands part of the network"),
        branch_(branch) {}
  int branch() const { return branch_; }

 private:
  int branch_;
};

}  // namespace gridssa
