#pragma once

#include <stdexcept>
#include <string>

namespace blindspot {

// Base type for all errors raised by this library.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid or inconsistent configuration (bad key, bad enum value, bad range).
struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error("config error: " + msg) {}
};

// Violation of a domain contract (invalid action, stepping a terminal state,
// unknown state, mismatched state spaces, enumeration over cap).
struct DomainError : Error {
  explicit DomainError(const std::string& msg) : Error("domain error: " + msg) {}
};

// Numeric failure (non-finite values, empty data where data is required).
struct NumericError : Error {
  explicit NumericError(const std::string& msg) : Error("numeric error: " + msg) {}
};

// File I/O or format failure.
struct IoError : Error {
  explicit IoError(const std::string& msg) : Error("io error: " + msg) {}
};

}  // namespace blindspot
