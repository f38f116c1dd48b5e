#ifndef COJUMP_ERRORS_HPP
#define COJUMP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cojump {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A jump would drive a compartment occupancy below zero.
struct NegativeOccupancy : Error {
  using Error::Error;
};

/// A family rate evaluated to a non-finite or negative value.
struct RateOverflow : Error {
  using Error::Error;
};

/// A transition label pair is not part of the system.
struct UnknownTransition : Error {
  using Error::Error;
};

/// A co-jump size exceeds the source occupancy (or is identically zero).
struct InvalidJumpSize : Error {
  using Error::Error;
};

/// Cancellation in an alternating sum exceeded the tolerated error and no
/// extended-precision fallback could repair it.
struct PrecisionLoss : Error {
  using Error::Error;
};

/// A trajectory exceeded the configured event cap.
struct EventBudgetExceeded : Error {
  using Error::Error;
};

/// An estimation step h violates the small-step precondition.
struct StepTooLarge : Error {
  using Error::Error;
};

/// Adaptive quadrature could not reach the requested tolerance.
struct QuadratureFailure : Error {
  using Error::Error;
};

/// A rate exceeded its static majorant; indicates a spec construction bug.
struct BoundViolated : Error {
  using Error::Error;
};

/// Cross-immunity gamma != 0 is not supported together with noise.
struct UnsupportedGamma : Error {
  using Error::Error;
};

/// Malformed run configuration (file syntax, unknown keys, bad values).
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace cojump

#endif  // COJUMP_ERRORS_HPP
