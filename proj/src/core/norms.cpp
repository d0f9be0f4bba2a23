#include "mcpert/norms.hpp"

#include <algorithm>

#include "mcpert/errors.hpp"

namespace mcpert {

namespace {

void require_size(Index got, const WeightFunction& v) {
  if (got != v.size()) throw Error(ErrorKind::ValidationError, "weight function size mismatch");
}

}  // namespace

double total_variation_norm(const RowVector& mu) { return mu.cwiseAbs().sum(); }

double v_norm_measure(const RowVector& mu, const WeightFunction& v) {
  require_size(mu.size(), v);
  return mu.cwiseAbs().dot(v.values().transpose());
}

double v_norm_vector(const Vector& x, const WeightFunction& v) {
  require_size(x.size(), v);
  return x.cwiseAbs().cwiseQuotient(v.values()).maxCoeff();
}

double v_norm_matrix(const Matrix& l, const WeightFunction& v) {
  require_size(l.rows(), v);
  require_size(l.cols(), v);
  return (l.cwiseAbs() * v.values()).cwiseQuotient(v.values()).maxCoeff();
}

double matrix_norm(const Matrix& l) { return l.cwiseAbs().rowwise().sum().maxCoeff(); }

double ergodicity_coefficient(const Matrix& b) {
  // Rows of b as contiguous columns.
  const Matrix rows = b.transpose();
  double best = 0.0;
  for (Index i = 0; i + 1 < rows.cols(); ++i) {
    const Index rest = rows.cols() - i - 1;
    best = std::max(best, (rows.rightCols(rest).colwise() - rows.col(i)).cwiseAbs().colwise().sum().maxCoeff());
  }
  return 0.5 * best;
}

}  // namespace mcpert
