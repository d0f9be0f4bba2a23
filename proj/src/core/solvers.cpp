#include "mcpert/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <vector>

#include <Eigen/SparseCore>

#include "mcpert/errors.hpp"
#include "mcpert/norms.hpp"

namespace mcpert {

namespace {

// Stationary vector of an irreducible kernel from its off-diagonal part only,
// so the same routine serves P and Q.
RowVector state_reduction(const Matrix& m) {
  const Index n = m.rows();
  Matrix a = m;
  for (Index k = n - 1; k >= 1; --k) {
    const double s = a.row(k).head(k).sum();
    if (!(s > 0.0)) {
      throw Error(ErrorKind::SolverFailure, "state reduction met a state with no exit to lower states", k);
    }
    a.col(k).head(k) /= s;
    a.topLeftCorner(k, k).noalias() += a.col(k).head(k) * a.row(k).head(k);
  }
  RowVector x(n);
  x(0) = 1.0;
  for (Index j = 1; j < n; ++j) {
    x(j) = x.head(j).dot(a.col(j).head(j).transpose());
  }
  return x / x.sum();
}

RowVector replaced_equation(const Matrix& p) {
  const Index n = p.rows();
  Matrix system = Matrix::Identity(n, n) - p.transpose();
  system.row(n - 1).setOnes();
  Vector rhs = Vector::Zero(n);
  rhs(n - 1) = 1.0;
  Eigen::PartialPivLU<Matrix> lu(system);
  return lu.solve(rhs).transpose();
}

// Clears rounding-level negatives; anything larger is a solver failure.
RowVector clean(RowVector x, double tol) {
  for (Index i = 0; i < x.size(); ++i) {
    if (x(i) < 0.0) {
      if (x(i) < -tol) {
        std::ostringstream msg;
        msg << "stationary solve produced mass " << x(i) << " at state " << i;
        throw Error(ErrorKind::SolverFailure, msg.str(), i);
      }
      x(i) = 0.0;
    }
  }
  return x / x.sum();
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

Distribution stationary_distribution(const StochasticMatrix& p, StationaryMethod method,
                                     const NumericSettings& settings) {
  if (!p.irreducible()) throw Error(ErrorKind::ReducibleChain, "transition graph is not strongly connected");
  const RowVector raw =
      method == StationaryMethod::StateReduction ? state_reduction(p.matrix()) : replaced_equation(p.matrix());
  if (!raw.allFinite()) throw Error(ErrorKind::SolverFailure, "stationary solve produced non-finite values");
  RowVector pi = clean(raw, settings.stationarity_tol);
  const double residual = max_abs(pi * p.matrix() - pi);
  if (residual > settings.stationarity_tol) {
    std::ostringstream msg;
    msg << "residual of pi P = pi is " << residual;
    throw Error(ErrorKind::SolverFailure, msg.str());
  }
  return Distribution(std::move(pi), settings);
}

Distribution stationary_distribution(const IntensityMatrix& q, const NumericSettings& settings) {
  if (!q.irreducible()) throw Error(ErrorKind::ReducibleChain, "rate graph is not strongly connected");
  RowVector pi = clean(state_reduction(q.matrix()), settings.stationarity_tol);
  const double residual = max_abs(pi * q.matrix()) / q.uniformization_constant();
  if (residual > settings.stationarity_tol) {
    std::ostringstream msg;
    msg << "scaled residual of pi Q = 0 is " << residual;
    throw Error(ErrorKind::SolverFailure, msg.str());
  }
  return Distribution(std::move(pi), settings);
}

Matrix fundamental_matrix(const StochasticMatrix& p, const Distribution& pi, const NumericSettings& settings) {
  const Index n = p.size();
  const Matrix identity = Matrix::Identity(n, n);
  const Matrix system = identity - p.matrix() + pi.stacked();
  Eigen::PartialPivLU<Matrix> lu(system);
  Matrix r = lu.inverse();
  if (!r.allFinite()) throw Error(ErrorKind::SolverFailure, "I - P + Pi is numerically singular");
  // Residuals scale with ||R||; the absolute tolerance applies to R of order one.
  const double scale = std::max(1.0, matrix_norm(r));
  const double residual = std::max(max_abs(r * system - identity), max_abs(system * r - identity));
  if (residual > settings.inverse_tol * scale) {
    std::ostringstream msg;
    msg << "residual of R (I - P + Pi) = I is " << residual;
    throw Error(ErrorKind::SolverFailure, msg.str());
  }
  return r;
}

Matrix group_inverse(const StochasticMatrix& p, const Distribution& pi, const NumericSettings& settings) {
  return fundamental_matrix(p, pi, settings) - pi.stacked();
}

Matrix deviation_matrix(const StochasticMatrix& p, const Distribution& pi, const NumericSettings& settings) {
  if (!p.aperiodic()) {
    std::ostringstream msg;
    msg << "chain has period " << p.period() << "; the deviation matrix exists only for aperiodic chains";
    throw Error(ErrorKind::PeriodicChain, msg.str());
  }
  return group_inverse(p, pi, settings);
}

Matrix solve_transient_system(Matrix w, Vector exit, Matrix b) {
  const Index k = w.rows();
  w.diagonal().setZero();
  Vector pivot(k);
  // Censoring state j folds its paths into the lower states; the loop
  // i -> j -> i only adds holding time, so it leaves the pivots alone.
  for (Index j = k - 1; j >= 0; --j) {
    pivot(j) = exit(j) + w.row(j).head(j).sum();
    if (!(pivot(j) > 0.0)) throw Error(ErrorKind::SolverFailure, "state has no path to an exit", j);
    if (j == 0) break;
    const Vector f = w.col(j).head(j) / pivot(j);
    w.topLeftCorner(j, j).noalias() += f * w.row(j).head(j);
    w.topLeftCorner(j, j).diagonal().setZero();
    exit.head(j) += f * exit(j);
    b.topRows(j).noalias() += f * b.row(j);
  }
  Matrix x(k, b.cols());
  for (Index j = 0; j < k; ++j) x.row(j) = (b.row(j) + w.row(j).head(j) * x.topRows(j)) / pivot(j);
  return x;
}

Vector mean_hitting_times(const Matrix& kernel, Index target) {
  const Index n = kernel.rows();
  if (target < 0 || target >= n) throw Error(ErrorKind::InvalidParameters, "target state out of range");
  Vector result = Vector::Zero(n);
  if (n == 1) return result;
  std::vector<Index> others;
  for (Index i = 0; i < n; ++i) {
    if (i != target) others.push_back(i);
  }
  const Index k = n - 1;
  Matrix w(k, k);
  Vector exit(k);
  for (Index r = 0; r < k; ++r) {
    for (Index c = 0; c < k; ++c) w(r, c) = kernel(others[r], others[c]);
    exit(r) = kernel(others[r], target);
  }
  Vector m;
  try {
    m = solve_transient_system(std::move(w), std::move(exit), Matrix::Ones(k, 1));
  } catch (const Error& e) {
    const Index state = others[static_cast<std::size_t>(*e.state())];
    throw Error(ErrorKind::SolverFailure, "target is not reachable from state " + std::to_string(state), state);
  }
  for (Index r = 0; r < k; ++r) result(others[r]) = m(r);
  return result;
}

Matrix matrix_power(const Matrix& p, int m) {
  if (m < 0) throw Error(ErrorKind::InvalidParameters, "negative matrix power");
  if (m == 0) return Matrix::Identity(p.rows(), p.cols());
  // Banded and other sparse kernels: m - 1 sparse-dense products beat the
  // dense squarings by a wide margin.
  const double n = static_cast<double>(p.rows());
  const double nonzeros = static_cast<double>((p.array() != 0.0).count());
  if ((m - 1) * nonzeros < std::log2(static_cast<double>(m) + 1.0) * n * n) {
    const Eigen::SparseMatrix<double> sparse = p.sparseView();
    Matrix result = p;
    for (int k = 1; k < m; ++k) result = sparse * result;
    return result;
  }
  std::optional<Matrix> result;
  Matrix base = p;
  while (true) {
    if (m & 1) result = result ? Matrix(*result * base) : base;
    m >>= 1;
    if (m == 0) break;
    base = base * base;
  }
  return *result;
}

}  // namespace mcpert
