#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nansde {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid construction arguments or configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A noise generator could not produce a sample (e.g. non-PSD covariance).
class GenerationError : public Error {
 public:
  using Error::Error;
};

class KernelError : public Error {
 public:
  using Error::Error;
};

/// Tensor dimensions disagree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// API misuse, e.g. replaying a consumed tape.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Non-finite or runaway state in a time-stepping scheme.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, std::size_t step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// Path blew up during ensemble simulation; carries the path index as well.
class DivergenceError : public IntegrationError {
 public:
  DivergenceError(const std::string& what, std::size_t step, std::size_t path)
      : IntegrationError(what + " in path " + std::to_string(path), step),
        path_(path) {}

  std::size_t path() const noexcept { return path_; }

 private:
  std::size_t path_;
};

class DataError : public Error {
 public:
  DataError(const std::string& what, std::size_t index)
      : Error(what + " (index " + std::to_string(index) + ")"), index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

class MetricError : public Error {
 public:
  using Error::Error;
};

class FileError : public Error {
 public:
  using Error::Error;
};

}  // namespace nansde
