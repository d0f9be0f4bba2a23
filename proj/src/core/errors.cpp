#include "mcpert/errors.hpp"

namespace mcpert {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ReducibleChain: return "ReducibleChain";
    case ErrorKind::PeriodicChain: return "PeriodicChain";
    case ErrorKind::SolverFailure: return "SolverFailure";
    case ErrorKind::HypothesisFailed: return "HypothesisFailed";
    case ErrorKind::NoSmallSet: return "NoSmallSet";
    case ErrorKind::DivergentHittingTimes: return "DivergentHittingTimes";
    case ErrorKind::InvalidParameters: return "InvalidParameters";
    case ErrorKind::DriftViolated: return "DriftViolated";
    case ErrorKind::UnboundedGenerator: return "UnboundedGenerator";
    case ErrorKind::InvalidStep: return "InvalidStep";
    case ErrorKind::NotErgodic: return "NotErgodic";
    case ErrorKind::NoPositiveLambda: return "NoPositiveLambda";
    case ErrorKind::OutOfRadius: return "OutOfRadius";
    case ErrorKind::SeriesDivergent: return "SeriesDivergent";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message, std::optional<long> state)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), state_(state) {}

}  // namespace mcpert
