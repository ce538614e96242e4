#pragma once

#include <stdexcept>
#include <string>

namespace wgf {

// Base class for all errors raised by the library.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A direct factorization hit a pivot below the singularity threshold.
struct SingularMatrixError : Error {
  explicit SingularMatrixError(const std::string& msg) : Error(msg) {}
};

// The balance system for the stationary distribution is rank deficient
// beyond the expected single null direction.
struct NonUniqueStationaryError : Error {
  explicit NonUniqueStationaryError(const std::string& msg) : Error(msg) {}
};

// Caller violated a precondition (dimension mismatch, cross-tape vars, ...).
struct UsageError : Error {
  explicit UsageError(const std::string& msg) : Error(msg) {}
};

// Input outside the mathematical domain of an operation.
struct DomainError : Error {
  explicit DomainError(const std::string& msg) : Error(msg) {}
};

// Configuration file problems (parse errors, unknown keys, range violations).
struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

}  // namespace wgf
