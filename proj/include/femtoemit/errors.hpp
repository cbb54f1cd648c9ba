#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace femtoemit {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed or physically invalid input data. Carries the 0-based record
// index (row in a dataset, line in a file) when one applies.
class DataError : public std::runtime_error {
 public:
  static constexpr std::size_t kNoIndex = static_cast<std::size_t>(-1);

  explicit DataError(const std::string& what, std::size_t index = kNoIndex)
      : std::runtime_error(what), index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

// Iterative or adaptive numerics that did not meet tolerance.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad command line or unknown identifier.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace femtoemit
