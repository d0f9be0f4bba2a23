#pragma once

#include <Eigen/Dense>

#include "mcpert/settings.hpp"

namespace mcpert {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;        // functions on states (column vectors)
using RowVector = Eigen::RowVectorXd;  // measures on states (row vectors)
using Index = Eigen::Index;

/// Row-stochastic transition kernel of a finite DTMC.
///
/// Construction validates nonnegativity and unit row sums, then caches
/// irreducibility (strong connectivity of the transition graph) and the
/// period of state 0 (BFS level gcd).
class StochasticMatrix {
 public:
  explicit StochasticMatrix(Matrix entries, const NumericSettings& settings = default_settings());

  const Matrix& matrix() const noexcept { return p_; }
  double operator()(Index i, Index j) const { return p_(i, j); }
  Index size() const noexcept { return p_.rows(); }
  bool irreducible() const noexcept { return irreducible_; }
  long period() const noexcept { return period_; }
  bool aperiodic() const noexcept { return period_ == 1; }

 private:
  Matrix p_;
  bool irreducible_ = false;
  long period_ = 0;
};

/// Conservative generator of a finite CTMC with bounded rates.
class IntensityMatrix {
 public:
  explicit IntensityMatrix(Matrix entries, const NumericSettings& settings = default_settings());

  const Matrix& matrix() const noexcept { return q_; }
  double operator()(Index i, Index j) const { return q_(i, j); }
  Index size() const noexcept { return q_.rows(); }
  bool irreducible() const noexcept { return irreducible_; }
  /// sup_i (-Q(i,i)).
  double uniformization_constant() const noexcept { return rate_bound_; }

 private:
  Matrix q_;
  bool irreducible_ = false;
  double rate_bound_ = 0.0;
};

/// Probability row vector.
class Distribution {
 public:
  explicit Distribution(RowVector values, const NumericSettings& settings = default_settings());

  const RowVector& values() const noexcept { return values_; }
  double operator()(Index i) const { return values_(i); }
  Index size() const noexcept { return values_.size(); }
  /// Matrix whose rows all equal this distribution.
  Matrix stacked() const;

 private:
  RowVector values_;
};

/// Strictly positive weights V used for V-norms and drift functions.
class WeightFunction {
 public:
  explicit WeightFunction(Vector values);
  static WeightFunction constant(Index n, double value = 1.0);

  const Vector& values() const noexcept { return values_; }
  double operator()(Index i) const { return values_(i); }
  Index size() const noexcept { return values_.size(); }
  double lower_bound() const noexcept { return lower_bound_; }
  double upper_bound() const noexcept { return values_.maxCoeff(); }

 private:
  Vector values_;
  double lower_bound_ = 0.0;
};

/// A DTMC and its perturbation, Delta = perturbed - base.
struct DtmcPair {
  DtmcPair(StochasticMatrix base, StochasticMatrix perturbed);

  StochasticMatrix base;
  StochasticMatrix perturbed;
  Matrix delta;
};

/// A CTMC and its perturbation, Delta = perturbed - base.
struct CtmcPair {
  CtmcPair(IntensityMatrix base, IntensityMatrix perturbed);

  IntensityMatrix base;
  IntensityMatrix perturbed;
  Matrix delta;
};

/// Strong connectivity of the graph with edges {(i, j) : i != j, M(i, j) > 0}.
bool strongly_connected(const Matrix& m);
/// gcd of cycle lengths through state 0 in the graph {(i, j) : M(i, j) > 0},
/// restricted to states reachable from 0.
long period_of_state_zero(const Matrix& m);

}  // namespace mcpert
