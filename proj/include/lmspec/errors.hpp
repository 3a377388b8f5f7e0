#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lmspec {

/// Invalid run configuration or argument outside its documented domain.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or unreadable input series.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Base class for every numerical failure (non-finite values, factorization
/// breakdown, root-finder failure, degenerate particle systems).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A spectral density or integrand returned a non-finite value at a grid node.
class EvaluationError : public NumericalError {
 public:
  EvaluationError(const std::string& what, std::size_t node)
      : NumericalError(what + " (grid node " + std::to_string(node) + ")"),
        node_(node) {}
  std::size_t node() const noexcept { return node_; }

 private:
  std::size_t node_;
};

/// Cholesky factorization hit a non-positive pivot.
class NotPositiveDefinite : public NumericalError {
 public:
  explicit NotPositiveDefinite(std::size_t index)
      : NumericalError("matrix is not positive definite (pivot " +
                       std::to_string(index) + ")"),
        index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// All particle weights vanished.
class DegenerateSystem : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace lmspec
