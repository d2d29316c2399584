#pragma once

#include <stdexcept>
#include <string>

namespace schottky {

// Exit-code mapping in the CLI: Verification/Precondition -> 1,
// Budget/Precision -> 2, Input -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class VerificationError : public Error {
 public:
  using Error::Error;
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

class PrecisionError : public Error {
 public:
  using Error::Error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

}  // namespace schottky
