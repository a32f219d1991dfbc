#pragma once

#include <stdexcept>
#include <string>

namespace rons {

/// Broad failure class. The CLI maps validation failures to exit code 1
/// and numerical failures to exit code 2.
enum class ErrorKind { validation, numerical };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ErrorKind::validation, what) {}
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what)
      : Error(ErrorKind::validation, what) {}
};

class AlignmentError : public Error {
 public:
  explicit AlignmentError(const std::string& what)
      : Error(ErrorKind::validation, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what)
      : Error(ErrorKind::validation, what) {}
};

class SingularMetricError : public Error {
 public:
  explicit SingularMetricError(const std::string& what)
      : Error(ErrorKind::numerical, what) {}
};

class ConditioningError : public Error {
 public:
  explicit ConditioningError(const std::string& what)
      : Error(ErrorKind::numerical, what) {}
};

class RankError : public Error {
 public:
  RankError(const std::string& what, std::size_t usable)
      : Error(ErrorKind::numerical, what), usable_(usable) {}

  /// Largest mode count the data supports.
  std::size_t usable() const noexcept { return usable_; }

 private:
  std::size_t usable_;
};

class DryStateError : public Error {
 public:
  explicit DryStateError(const std::string& what)
      : Error(ErrorKind::numerical, what) {}
};

/// A non-finite value appeared while advancing the solution.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, double time)
      : Error(ErrorKind::numerical, what), time_(time) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

class StepCollapseError : public Error {
 public:
  StepCollapseError(const std::string& what, double time)
      : Error(ErrorKind::numerical, what), time_(time) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace rons
