#pragma once

#include <stdexcept>
#include <string>

namespace dcevae {

// Shape or dimension mismatch detected before any computation runs.
struct ShapeError : std::invalid_argument {
  explicit ShapeError(const std::string& what) : std::invalid_argument(what) {}
};

// Non-finite values, singular matrices, failed convergence.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input files, unknown categories, unreadable paths.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Bad CLI usage or inconsistent configuration.
struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dcevae
