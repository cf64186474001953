#pragma once

#include <stdexcept>
#include <string>

namespace gmflow {

/// Non-convergence or branch failure in a numerical kernel. `reproduction()`
/// carries enough data to replay the failing call.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, std::string reproduction)
      : std::runtime_error(what), reproduction_(std::move(reproduction)) {}
  const std::string& reproduction() const { return reproduction_; }

 private:
  std::string reproduction_;
};

}  // namespace gmflow

namespace gmflow {

/// A file could not be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gmflow
