#pragma once

#include <stdexcept>
#include <string>

namespace resop {

// Malformed datasets, config files, or values violating type invariants.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Caller broke an API precondition (shape mismatch, bad probability vector, ...).
class ContractError : public std::runtime_error {
 public:
  explicit ContractError(const std::string& msg) : std::runtime_error(msg) {}
};

// A value fell outside the domain covered by an interpolation table.
class RangeError : public std::runtime_error {
 public:
  explicit RangeError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace resop
