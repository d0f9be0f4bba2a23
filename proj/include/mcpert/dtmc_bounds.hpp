#pragma once

#include <optional>
#include <utility>

#include "mcpert/chain.hpp"
#include "mcpert/report.hpp"

namespace mcpert {

/// Minorization of P^m by delta_m(k) = min_i P^m(i,k); nu_mass = sum_k delta_m(k).
struct SmallSetCertificate {
  int m = 0;
  double nu_mass = 0.0;
  Vector per_state_minima;
};

/// D1(V, {i0}): V >= 0, V(i0) = 0 and PV(i) <= V(i) - 1 for i != i0.
struct DriftCertificateD1 {
  Index taboo_state = 0;
  Vector v;
  double sup_v = 0.0;
};

/// D2(V, lambda, b, {i0}): PV <= lambda V + b 1{i0}, lambda < 1.
struct DriftCertificateD2 {
  Index taboo_state = 0;
  WeightFunction v;
  double lambda = 0.0;
  double b = 0.0;
  std::optional<double> pi_v;
};

struct SmallSetOptions {
  int m_min = 1;
  int m_max = 8;
};

/// ||nu - pi|| <= ||Delta|| / (1 - Lambda_1(P)). Throws HypothesisFailed when
/// Lambda_1(P) >= 1 - margin.
BoundReport seneta_bound(const StochasticMatrix& p, double delta_norm,
                         const NumericSettings& settings = default_settings());

/// ||nu - pi|| <= Lambda_1(A#) ||Delta||, the smallest norm-wise coefficient.
BoundReport seneta_best_bound(const StochasticMatrix& p, const Distribution& pi,
                              std::optional<double> delta_norm = std::nullopt,
                              const NumericSettings& settings = default_settings());

/// ||nu - pi|| <= ||P^m - P~^m|| / (1 - Lambda_1(P^m)); ell = m / (1 - Lambda_1(P^m)).
BoundReport skeleton_bound(const StochasticMatrix& p, const StochasticMatrix& p_tilde, int m,
                           const NumericSettings& settings = default_settings());

/// P^m and P~^m, shared by the skeleton and small-set bounds so that callers
/// evaluating many perturbations of one chain can reuse P^m.
struct SkeletonPowers {
  int m = 0;
  Matrix pm;
  Matrix pm_tilde;
  /// ||P~ - P||.
  double delta_norm = 0.0;
  /// Lambda_1(P^m) when already known.
  std::optional<double> lambda1_pm;
};

SkeletonPowers skeleton_powers(const StochasticMatrix& p, const StochasticMatrix& p_tilde, int m);

BoundReport skeleton_bound(const SkeletonPowers& powers, const NumericSettings& settings = default_settings());

/// The small-set bound of a fixed certificate for the perturbation in
/// `powers` (whose order must match the certificate).
BoundReport small_set_bound(const SmallSetCertificate& cert, const SkeletonPowers& powers);

/// delta_m and nu_m(E) for one m.
SmallSetCertificate small_set_certificate(const StochasticMatrix& p, int m);

/// Scans m in [m_min, m_max] for the smallest m / nu_m(E). When `p_tilde` is
/// supplied the report value is ||P^m - P~^m|| / nu_m(E) and `ell * ||Delta||`
/// is recorded as the looser form. Throws NoSmallSet when nu_m(E) = 0 for every m.
std::pair<BoundReport, SmallSetCertificate> small_set_bound(
    const StochasticMatrix& p, const SmallSetOptions& options = {},
    const std::optional<StochasticMatrix>& p_tilde = std::nullopt);

/// Mean first hitting times m_{i,target} by solving (I - P restricted off the
/// target) m = 1. Throws SolverFailure when the restricted system is singular
/// (target not reachable from every state).
Vector hitting_times(const StochasticMatrix& p, Index target,
                     const NumericSettings& settings = default_settings());

/// Closed-form hitting times to state `target` for the birth-death chain with
/// down probabilities a(1..n), up probabilities b(0..n-1) and holding c(0..n).
/// `a(0)` and `b(n)` are ignored. Throws InvalidParameters on non-stochastic or
/// reducible parameters.
Vector birth_death_hitting_times(const Vector& a, const Vector& b, const Vector& c, Index target);

/// Validates a D1 certificate against P; throws DriftViolated naming the first
/// violating state.
void validate_drift_d1(const StochasticMatrix& p, const DriftCertificateD1& cert,
                       const NumericSettings& settings = default_settings());

/// V = m_{., i0}, which satisfies D1 with equality.
DriftCertificateD1 drift_d1_from_hitting_times(const StochasticMatrix& p, Index taboo_state,
                                               const NumericSettings& settings = default_settings());

/// ||nu - pi|| <= 2 (sup V)^2 ||Delta|| for a validated D1 certificate.
BoundReport drift_bound_d1(const StochasticMatrix& p, const DriftCertificateD1& cert,
                           std::optional<double> delta_norm = std::nullopt,
                           const NumericSettings& settings = default_settings());

/// ||nu - pi|| <= 2 min_{i0} (max_i m_{i,i0})^2 ||Delta||, exhaustive over i0,
/// ties to the smallest index.
BoundReport drift_bound_hitting(const StochasticMatrix& p,
                                std::optional<double> delta_norm = std::nullopt,
                                const NumericSettings& settings = default_settings());

/// Tightest lambda for the given V: lambda = max_{i != i0} PV(i)/V(i),
/// b = max(0, PV(i0) - lambda V(i0)). Throws DriftViolated when lambda >= 1.
DriftCertificateD2 fit_drift_d2(const StochasticMatrix& p, const WeightFunction& v,
                                Index taboo_state,
                                const NumericSettings& settings = default_settings());

/// Entrywise check of PV <= lambda V + b 1{i0}; throws DriftViolated.
void validate_drift_d2(const StochasticMatrix& p, const DriftCertificateD2& cert,
                       const NumericSettings& settings = default_settings());

/// ||nu - pi||_V <= c ||pi||_V ||Delta||_V / (1 - lambda - c ||Delta||_V),
/// c = 1 + ||e||_V ||pi||_V, when ||Delta||_V < (1 - lambda) / c.
BoundReport v_bound_i(const StochasticMatrix& p, const DriftCertificateD2& cert,
                      const Distribution& pi, double delta_v_norm);

/// ||nu - pi||_V <= b (b + 1 - lambda) ||Delta||_V /
///   ((1 - lambda)^3 - (1 - lambda)(b + 1 - lambda) ||Delta||_V),
/// when V >= 1 and ||Delta||_V < (1 - lambda)^2 / (b + 1 - lambda). Needs no pi.
BoundReport v_bound_ii(const DriftCertificateD2& cert, double delta_v_norm);

}  // namespace mcpert
