#pragma once

#include <stdexcept>
#include <string>

namespace splitkit {

// Caller violated a precondition (bad dimension, parameter out of range, ...).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A NaN or Inf appeared; the message names the operation that produced it.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A linear map lacks the rank an operation needs (e.g. a left inverse).
class RankError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace splitkit
