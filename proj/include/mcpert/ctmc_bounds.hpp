#pragma once

#include <optional>
#include <vector>

#include "mcpert/chain.hpp"
#include "mcpert/dtmc_bounds.hpp"
#include "mcpert/report.hpp"

namespace mcpert {

/// The h-approximation chain P_h = I + hQ.
struct UniformizedChain {
  double h = 0.0;
  StochasticMatrix p_h;
};

/// D2'(V, lambda, b, {i0}): QV <= -lambda V + b 1{i0}, lambda > 0.
struct CtmcDriftD2Prime {
  Index taboo_state = 0;
  WeightFunction v;
  double lambda = 0.0;
  double b = 0.0;
};

/// Step used when none is given: 0.99 / sup_i Q_i.
double default_step(const IntensityMatrix& q);
/// Step for a pair: 0.99 / max(sup Q_i, sup Q~_i).
double default_step(const CtmcPair& pair);

/// Throws InvalidStep unless 0 < h < 1 / sup_i Q_i.
UniformizedChain uniformize(const IntensityMatrix& q, std::optional<double> h = std::nullopt);

/// Largest h for which Lambda_1(P_h) = 1 - h Lambda_1(Q) holds exactly:
/// 1 / max_{i != j} (Q_i + Q(j,i)). Below it every absolute value in the
/// definition of Lambda_1(P_h) opens without a sign change.
double lambda1_transfer_step_limit(const IntensityMatrix& q);

/// D = int_0^inf (P^t - Pi) dt, computed as h D_h on the h-approximation chain.
Matrix ctmc_deviation_matrix(const IntensityMatrix& q, std::optional<double> h = std::nullopt,
                             const NumericSettings& settings = default_settings());

/// Lambda_1(Q) = 1/2 min_{i != j} [|Q_ii - Q_ji| + |Q_ij - Q_jj| - sum_{s != i,j} |Q_is - Q_js|].
double ctmc_ergodicity_coefficient(const IntensityMatrix& q);

/// Mean hitting times of `target`: QV = -1 off the target, V(target) = 0.
Vector ctmc_hitting_times(const IntensityMatrix& q, Index target,
                          const NumericSettings& settings = default_settings());

/// ||nu - pi|| <= ||D|| ||Delta||.
BoundReport ctmc_deviation_bound(const IntensityMatrix& q, std::optional<double> delta_norm = std::nullopt,
                                 const NumericSettings& settings = default_settings());

/// ||nu - pi|| <= ||Delta|| / Lambda_1(Q) when Lambda_1(Q) > 0.
BoundReport ctmc_lambda1_bound(const IntensityMatrix& q, std::optional<double> delta_norm = std::nullopt,
                               const NumericSettings& settings = default_settings());

/// ||nu - pi|| <= ||Delta|| / sum_k delta_k with delta_k = min_{i != k} Q(i,k).
BoundReport ctmc_small_set_bound(const IntensityMatrix& q, std::optional<double> delta_norm = std::nullopt);

/// Checks D1'(V, {i0}): V >= 0, V(i0) = 0, QV <= -1 off i0. Throws DriftViolated.
void validate_ctmc_drift_d1(const IntensityMatrix& q, const Vector& v, Index taboo_state,
                            const NumericSettings& settings = default_settings());

/// ||nu - pi|| <= 2 (sup V)^2 ||Delta|| under D1'(V, {i0}).
BoundReport ctmc_drift_bound_d1(const IntensityMatrix& q, const Vector& v, Index taboo_state,
                                std::optional<double> delta_norm = std::nullopt,
                                const NumericSettings& settings = default_settings());

/// D1' bound with V = hitting times of the best i0 (exhaustive, ties to smallest index).
BoundReport ctmc_drift_bound_hitting(const IntensityMatrix& q,
                                     std::optional<double> delta_norm = std::nullopt,
                                     const NumericSettings& settings = default_settings());

/// Entrywise check of D2'; throws DriftViolated.
void validate_ctmc_drift_d2(const IntensityMatrix& q, const CtmcDriftD2Prime& cert,
                            const NumericSettings& settings = default_settings());

/// Tightest lambda for V: lambda = min_{i != i0} -QV(i)/V(i),
/// b = max(0, QV(i0) + lambda V(i0)). Throws NoPositiveLambda when lambda <= 0.
CtmcDriftD2Prime fit_ctmc_drift_d2(const IntensityMatrix& q, const WeightFunction& v, Index taboo_state,
                                   const NumericSettings& settings = default_settings());

/// The discrete certificate P_h V <= (1 - lambda h) V + b h 1{i0}.
DriftCertificateD2 transfer_drift(const CtmcDriftD2Prime& cert, double h);

/// Both V-norm bounds: element 0 is the pi-based form, element 1 the form
/// that needs only (lambda, b). A variant whose hypothesis fails is returned
/// with `value` empty and the failed hypothesis recorded, independently of
/// the other.
std::vector<BoundReport> ctmc_v_bounds(const IntensityMatrix& q, const CtmcDriftD2Prime& cert,
                                       const std::optional<Distribution>& pi, double delta_v_norm,
                                       const NumericSettings& settings = default_settings());

/// Drift certificate for the skip-free-to-the-left generator with row 0 given
/// by `a` (a(0) = -sum_{k>=1} a(k)) and rows i >= 1 by Q(i, i-1+k) = b(k).
///
/// With B(z) = sum_k b_k z^k and A(z) = sum_k a_k z^k, finds rho = sup{z >= 1 :
/// B(z) <= 0}, maximizes -B(z)/z on [1, rho] (concave, so the grid bracket is
/// refined by bisection on the derivative) and returns V(i) = z0^i on
/// `n_states` states, lambda = max, b = A(z0) + lambda, taboo state 0.
struct BatchArrivalDrift {
  double z0 = 0.0;
  double rho = 0.0;
  CtmcDriftD2Prime certificate;
};
BatchArrivalDrift batch_arrival_drift(const Vector& a, const Vector& b, Index n_states,
                                      int z_grid = 1000);

/// Partial sums of nu = pi sum_n eps^n (G D)^n for the perturbed generator Q + eps G.
struct SeriesExpansion {
  RowVector approximation;
  int terms = 0;
  /// ||eps G D||_V, the geometric ratio of the terms.
  double ratio = 0.0;
  /// ||pi||_V ratio^{terms} / (1 - ratio) when ratio < 1, +inf otherwise.
  double tail_bound = 0.0;
  double radius = 0.0;
};
SeriesExpansion stationary_series_expansion(const IntensityMatrix& q, const Matrix& g, double eps,
                                            int n_terms, const CtmcDriftD2Prime& cert,
                                            const NumericSettings& settings = default_settings());

}  // namespace mcpert
