#include "mcpert/chain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>
#include <vector>

#include "mcpert/errors.hpp"

namespace mcpert {

namespace {

std::vector<bool> reachable(const Matrix& m, Index start, bool transpose) {
  const Index n = m.rows();
  std::vector<bool> seen(n, false);
  std::queue<Index> frontier;
  seen[start] = true;
  frontier.push(start);
  while (!frontier.empty()) {
    const Index u = frontier.front();
    frontier.pop();
    for (Index v = 0; v < n; ++v) {
      const double w = transpose ? m(v, u) : m(u, v);
      if (v != u && w > 0.0 && !seen[v]) {
        seen[v] = true;
        frontier.push(v);
      }
    }
  }
  return seen;
}

void require_square(const Matrix& m, const char* what) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    std::ostringstream msg;
    msg << what << " must be a nonempty square matrix, got " << m.rows() << "x" << m.cols();
    throw Error(ErrorKind::ValidationError, msg.str());
  }
  if (!m.allFinite()) {
    throw Error(ErrorKind::ValidationError, std::string(what) + " has non-finite entries");
  }
}

}  // namespace

bool strongly_connected(const Matrix& m) {
  const auto fwd = reachable(m, 0, false);
  const auto bwd = reachable(m, 0, true);
  for (std::size_t i = 0; i < fwd.size(); ++i) {
    if (!fwd[i] || !bwd[i]) return false;
  }
  return true;
}

long period_of_state_zero(const Matrix& m) {
  const Index n = m.rows();
  std::vector<long> level(n, -1);
  std::queue<Index> frontier;
  level[0] = 0;
  frontier.push(0);
  while (!frontier.empty()) {
    const Index u = frontier.front();
    frontier.pop();
    for (Index v = 0; v < n; ++v) {
      if (m(u, v) > 0.0 && level[v] < 0) {
        level[v] = level[u] + 1;
        frontier.push(v);
      }
    }
  }
  long d = 0;
  for (Index u = 0; u < n; ++u) {
    if (level[u] < 0) continue;
    for (Index v = 0; v < n; ++v) {
      if (m(u, v) > 0.0 && level[v] >= 0) {
        d = std::gcd(d, std::labs(level[u] + 1 - level[v]));
      }
    }
  }
  return d;
}

StochasticMatrix::StochasticMatrix(Matrix entries, const NumericSettings& settings) : p_(std::move(entries)) {
  require_square(p_, "transition matrix");
  for (Index i = 0; i < p_.rows(); ++i) {
    for (Index j = 0; j < p_.cols(); ++j) {
      if (p_(i, j) < 0.0) {
        std::ostringstream msg;
        msg << "row " << i << ": negative entry P(" << i << "," << j << ") = " << p_(i, j);
        throw Error(ErrorKind::ValidationError, msg.str(), i);
      }
    }
    const double sum = p_.row(i).sum();
    if (std::abs(sum - 1.0) > settings.validation_tol) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "row " << i << " sums to " << sum << ", not 1";
      throw Error(ErrorKind::ValidationError, msg.str(), i);
    }
  }
  irreducible_ = strongly_connected(p_);
  period_ = period_of_state_zero(p_);
}

IntensityMatrix::IntensityMatrix(Matrix entries, const NumericSettings& settings) : q_(std::move(entries)) {
  if (q_.rows() > 0 && q_.rows() == q_.cols() && !q_.allFinite()) {
    throw Error(ErrorKind::UnboundedGenerator, "generator has non-finite rates");
  }
  require_square(q_, "intensity matrix");
  for (Index i = 0; i < q_.rows(); ++i) {
    double scale = 1.0;
    for (Index j = 0; j < q_.cols(); ++j) {
      if (i != j && q_(i, j) < 0.0) {
        std::ostringstream msg;
        msg << "row " << i << ": negative off-diagonal rate Q(" << i << "," << j << ") = " << q_(i, j);
        throw Error(ErrorKind::ValidationError, msg.str(), i);
      }
      scale = std::max(scale, std::abs(q_(i, j)));
    }
    const double sum = q_.row(i).sum();
    if (std::abs(sum) > settings.validation_tol * scale) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "row " << i << " sums to " << sum << ", not 0 (generator must be conservative)";
      throw Error(ErrorKind::ValidationError, msg.str(), i);
    }
    rate_bound_ = std::max(rate_bound_, -q_(i, i));
  }
  if (!(rate_bound_ > 0.0)) {
    throw Error(ErrorKind::ValidationError, "generator has no positive rate");
  }
  irreducible_ = strongly_connected(q_);
}

Distribution::Distribution(RowVector values, const NumericSettings& settings) : values_(std::move(values)) {
  if (values_.size() == 0 || !values_.allFinite()) {
    throw Error(ErrorKind::ValidationError, "distribution must be a finite nonempty vector");
  }
  for (Index i = 0; i < values_.size(); ++i) {
    if (values_(i) < 0.0) {
      std::ostringstream msg;
      msg << "distribution has negative mass " << values_(i) << " at state " << i;
      throw Error(ErrorKind::ValidationError, msg.str(), i);
    }
  }
  if (std::abs(values_.sum() - 1.0) > settings.validation_tol) {
    throw Error(ErrorKind::ValidationError, "distribution does not sum to 1");
  }
}

Matrix Distribution::stacked() const { return values_.replicate(values_.size(), 1); }

WeightFunction::WeightFunction(Vector values) : values_(std::move(values)) {
  if (values_.size() == 0 || !values_.allFinite()) {
    throw Error(ErrorKind::ValidationError, "weight function must be a finite nonempty vector");
  }
  lower_bound_ = values_.minCoeff();
  if (!(lower_bound_ > 0.0)) {
    throw Error(ErrorKind::ValidationError, "weight function must be bounded away from zero");
  }
}

WeightFunction WeightFunction::constant(Index n, double value) {
  return WeightFunction(Vector::Constant(n, value));
}

DtmcPair::DtmcPair(StochasticMatrix base_, StochasticMatrix perturbed_)
    : base(std::move(base_)), perturbed(std::move(perturbed_)) {
  if (base.size() != perturbed.size()) {
    throw Error(ErrorKind::ValidationError, "perturbed chain has a different state count");
  }
  delta = perturbed.matrix() - base.matrix();
}

CtmcPair::CtmcPair(IntensityMatrix base_, IntensityMatrix perturbed_)
    : base(std::move(base_)), perturbed(std::move(perturbed_)) {
  if (base.size() != perturbed.size()) {
    throw Error(ErrorKind::ValidationError, "perturbed generator has a different state count");
  }
  delta = perturbed.matrix() - base.matrix();
}

}  // namespace mcpert
