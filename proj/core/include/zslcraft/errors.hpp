#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace zslcraft {

/// Coarse error category; the CLI maps it to a process exit code.
enum class ErrorKind {
  kConfig,   // exit 2
  kData,     // exit 3
  kNumeric,  // exit 4
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Operand dimensions do not agree.
class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error(ErrorKind::kData, "shape error: " + what) {}
};

/// Cholesky met a non-positive pivot.
class SingularMatrixError : public Error {
 public:
  SingularMatrixError(std::size_t pivot, const std::string& hint = {})
      : Error(ErrorKind::kNumeric,
              "singular matrix: non-positive pivot at index " + std::to_string(pivot) +
                  (hint.empty() ? std::string{} : "; " + hint)),
        pivot_(pivot) {}
  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

/// Malformed input file; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(ErrorKind::kData, "parse error at line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A domain invariant does not hold (duplicate ids, zero rows, label outside a set, ...).
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

/// Two artifacts that must agree (model rules vs. evaluation pool, ensemble orderings) do not.
class ConsistencyError : public Error {
 public:
  explicit ConsistencyError(const std::string& what)
      : Error(ErrorKind::kData, "consistency error: " + what) {}
};

/// A class id or label does not index into the given class pool.
class IndexError : public Error {
 public:
  explicit IndexError(const std::string& what) : Error(ErrorKind::kData, "index error: " + what) {}
};

/// Bad configuration value or key.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::kConfig, "config error: " + what) {}
};

/// A loss went non-finite during optimization.
class TrainingDivergedError : public Error {
 public:
  TrainingDivergedError(std::size_t epoch, const std::string& where)
      : Error(ErrorKind::kNumeric,
              where + " diverged: non-finite loss at epoch " + std::to_string(epoch)),
        epoch_(epoch) {}
  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

/// Metric is undefined for the given inputs (e.g. a class with no test samples).
class MetricError : public Error {
 public:
  explicit MetricError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

}  // namespace zslcraft
