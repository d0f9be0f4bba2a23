#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mcpert {

enum class ErrorKind {
  ValidationError,
  ParseError,
  ReducibleChain,
  PeriodicChain,
  SolverFailure,
  HypothesisFailed,
  NoSmallSet,
  DivergentHittingTimes,
  InvalidParameters,
  DriftViolated,
  UnboundedGenerator,
  InvalidStep,
  NotErgodic,
  NoPositiveLambda,
  OutOfRadius,
  SeriesDivergent,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library. `state()` names the offending state
/// (row, violating drift state, ...) when one exists.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::optional<long> state = std::nullopt);

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<long> state() const noexcept { return state_; }

 private:
  ErrorKind kind_;
  std::optional<long> state_;
};

}  // namespace mcpert
