#pragma once

namespace mcpert {

/// Numeric tolerances shared by every module.
struct NumericSettings {
  /// Entry signs and row sums of stochastic / intensity matrices.
  double validation_tol = 1e-12;
  /// Max-norm residual of pi P = pi (or pi Q = 0 scaled by the rate bound).
  double stationarity_tol = 1e-10;
  /// Residuals of R (I - P + Pi) = I and the group-inverse axioms.
  double inverse_tol = 1e-9;
  /// Entrywise slack allowed when checking drift inequalities.
  double drift_tol = 1e-10;
  /// Lambda_1 >= 1 - margin counts as "not a contraction".
  double contraction_margin = 1e-12;
};

inline const NumericSettings& default_settings() {
  static const NumericSettings settings{};
  return settings;
}

}  // namespace mcpert
