#pragma once

#include <stdexcept>
#include <string>

namespace neuromod {

// Invalid configuration or misuse of an interface (CLI exit code 1).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Unreadable/unwritable files or malformed file contents (CLI exit code 2).
struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite values encountered during training or evaluation (CLI exit code 3).
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace neuromod
