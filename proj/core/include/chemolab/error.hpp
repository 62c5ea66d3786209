#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace chemolab {

enum class ErrorKind {
  InvalidDimension,
  Domain,
  Structural,
  Regime,
  NonTermination,
  ConstantsOverflow,
  InternalConsistency,
  Precondition,
  Parse,
  Validation,
  Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; `kind()` classifies the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace chemolab
