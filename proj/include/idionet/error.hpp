#pragma once

#include <stdexcept>
#include <string>

namespace idionet {

/// Bad input data: malformed vote files, out-of-range scores, duplicates.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller violated an operation's precondition (empty profile, full pool, ...).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace idionet
