#pragma once

#include "mcpert/chain.hpp"

namespace mcpert {

enum class StationaryMethod {
  /// Grassmann-Taksar-Heyman state reduction. Subtraction free, so every
  /// component keeps full relative accuracy even when it is tiny.
  StateReduction,
  /// Dense LU on (I - P)^T with the last equation replaced by sum(pi) = 1.
  ReplacedEquation,
};

/// pi with pi P = pi, sum(pi) = 1.
///
/// Throws ReducibleChain when P is not irreducible and SolverFailure when the
/// max-norm residual of pi P - pi exceeds the stationarity tolerance.
Distribution stationary_distribution(const StochasticMatrix& p,
                                     StationaryMethod method = StationaryMethod::StateReduction,
                                     const NumericSettings& settings = default_settings());

/// pi with pi Q = 0, sum(pi) = 1. Same error contract as the DTMC solver.
Distribution stationary_distribution(const IntensityMatrix& q,
                                     const NumericSettings& settings = default_settings());

/// R = (I - P + Pi)^{-1}; defined for periodic chains too.
Matrix fundamental_matrix(const StochasticMatrix& p, const Distribution& pi,
                          const NumericSettings& settings = default_settings());

/// A# = R - Pi, the group inverse of A = I - P.
Matrix group_inverse(const StochasticMatrix& p, const Distribution& pi,
                     const NumericSettings& settings = default_settings());

/// D = sum_n (P^n - Pi) = R - Pi. Throws PeriodicChain when the period exceeds 1.
Matrix deviation_matrix(const StochasticMatrix& p, const Distribution& pi,
                        const NumericSettings& settings = default_settings());

/// Solves (diag(s) - W) X = B where W >= 0 has zero diagonal, exit >= 0,
/// s_i = exit_i + sum_j W(i,j) and B >= 0, by state reduction. No step
/// subtracts, so every entry of X keeps its relative accuracy however large
/// it is. Throws SolverFailure when some state has no path to positive exit.
Matrix solve_transient_system(Matrix w, Vector exit, Matrix b);

/// Mean hitting times of `target` from the off-diagonal part of a kernel
/// (transition matrix or generator): m(target) = 0 and
/// m(i) sum_{j != i} M(i,j) = 1 + sum_{j != i, target} M(i,j) m(j).
/// State reduction without subtractions, so huge and tiny entries alike keep
/// their relative accuracy. Throws SolverFailure when some state cannot reach
/// the target.
Vector mean_hitting_times(const Matrix& kernel, Index target);

/// P^m, by repeated squaring or, for sparse P, repeated sparse products.
Matrix matrix_power(const Matrix& p, int m);

}  // namespace mcpert
