#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace alignlab {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operands live on alphabets of different sizes or symbol sets.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// An argument is outside the mathematical domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A precondition of a bound does not hold for the instance, e.g. a reward
// outside [0, 1] for a bound that requires bounded rewards.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Exact computation would exceed its enumeration budget.
class BudgetError : public Error {
 public:
  BudgetError(const std::string& what, std::uint64_t required, std::uint64_t limit)
      : Error(what), required_(required), limit_(limit) {}

  std::uint64_t required() const noexcept { return required_; }
  std::uint64_t limit() const noexcept { return limit_; }

 private:
  std::uint64_t required_;
  std::uint64_t limit_;
};

// Something that cannot happen for valid inputs happened anyway.
class InternalError : public Error {
 public:
  using Error::Error;
};

// Malformed experiment configuration or command line.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace alignlab
