#pragma once

#include <stdexcept>
#include <string>

namespace qwalk {

/// Amplitude would be pushed off the truncated lattice. Carries the smallest
/// half-width that keeps the evolution exact.
class GuardViolation : public std::runtime_error {
 public:
  GuardViolation(const std::string& what, int required_half_width)
      : std::runtime_error(what), required_half_width_(required_half_width) {}

  int required_half_width() const noexcept { return required_half_width_; }

 private:
  int required_half_width_;
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A compiled optical train does not reproduce its reference operator.
class VerificationError : public std::runtime_error {
 public:
  VerificationError(const std::string& what, double fidelity)
      : std::runtime_error(what), fidelity_(fidelity) {}

  double fidelity() const noexcept { return fidelity_; }

 private:
  double fidelity_;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace qwalk
