#include "mcpert/ctmc_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "mcpert/errors.hpp"
#include "mcpert/norms.hpp"
#include "mcpert/solvers.hpp"

namespace mcpert {

namespace {

std::string fmt(double x) {
  std::ostringstream out;
  out.precision(10);
  out << x;
  return out.str();
}

double polynomial(const Vector& coeffs, double z) {
  double acc = 0.0;
  for (Index k = coeffs.size() - 1; k >= 0; --k) acc = acc * z + coeffs(k);
  return acc;
}

double polynomial_derivative(const Vector& coeffs, double z) {
  double acc = 0.0;
  for (Index k = coeffs.size() - 1; k >= 1; --k) acc = acc * z + static_cast<double>(k) * coeffs(k);
  return acc;
}

void require_irreducible(const IntensityMatrix& q) {
  if (!q.irreducible()) throw Error(ErrorKind::ReducibleChain, "rate graph is not strongly connected");
}

}  // namespace

double default_step(const IntensityMatrix& q) { return 0.99 / q.uniformization_constant(); }

double default_step(const CtmcPair& pair) {
  return 0.99 / std::max(pair.base.uniformization_constant(), pair.perturbed.uniformization_constant());
}

UniformizedChain uniformize(const IntensityMatrix& q, std::optional<double> h) {
  const double rate = q.uniformization_constant();
  if (!std::isfinite(rate)) throw Error(ErrorKind::UnboundedGenerator, "rates are not bounded");
  const double step = h.value_or(default_step(q));
  if (!(step > 0.0) || !(step * rate < 1.0)) {
    throw Error(ErrorKind::InvalidStep, "step " + fmt(step) + " is outside (0, 1/" + fmt(rate) + ")");
  }
  Matrix p = step * q.matrix();
  p.diagonal().array() += 1.0;
  return UniformizedChain{step, StochasticMatrix(std::move(p))};
}

double lambda1_transfer_step_limit(const IntensityMatrix& q) {
  double worst = 0.0;
  for (Index i = 0; i < q.size(); ++i) {
    for (Index j = 0; j < q.size(); ++j) {
      if (i != j) worst = std::max(worst, -q(i, i) + q(j, i));
    }
  }
  return worst > 0.0 ? 1.0 / worst : std::numeric_limits<double>::infinity();
}

Matrix ctmc_deviation_matrix(const IntensityMatrix& q, std::optional<double> h, const NumericSettings& settings) {
  require_irreducible(q);
  const UniformizedChain chain = uniformize(q, h);
  const Distribution pi = stationary_distribution(chain.p_h, StationaryMethod::StateReduction, settings);
  return chain.h * deviation_matrix(chain.p_h, pi, settings);
}

double ctmc_ergodicity_coefficient(const IntensityMatrix& q) {
  const Index n = q.size();
  if (n < 2) throw Error(ErrorKind::InvalidParameters, "Lambda_1(Q) needs at least two states");
  double best = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      double term = std::abs(q(i, i) - q(j, i)) + std::abs(q(i, j) - q(j, j));
      for (Index s = 0; s < n; ++s) {
        if (s != i && s != j) term -= std::abs(q(i, s) - q(j, s));
      }
      best = std::min(best, term);
    }
  }
  return 0.5 * best;
}

Vector ctmc_hitting_times(const IntensityMatrix& q, Index target, const NumericSettings& settings) {
  const Index n = q.size();
  if (target < 0 || target >= n) throw Error(ErrorKind::InvalidParameters, "target state out of range");
  require_irreducible(q);
  const Vector m = mean_hitting_times(q.matrix(), target);
  Vector residual = q.matrix() * m + Vector::Ones(n);
  residual(target) = 0.0;
  const double scale = std::max(1.0, q.uniformization_constant() * m.maxCoeff());
  if (!m.allFinite() || residual.cwiseAbs().maxCoeff() > settings.inverse_tol * scale) {
    throw Error(ErrorKind::SolverFailure, "hitting-time residual " + fmt(residual.cwiseAbs().maxCoeff()));
  }
  return m;
}

BoundReport ctmc_deviation_bound(const IntensityMatrix& q, std::optional<double> delta_norm,
                                 const NumericSettings& settings) {
  const Matrix d = ctmc_deviation_matrix(q, std::nullopt, settings);
  BoundReport report;
  report.bound_name = "ctmc_deviation";
  report.hypotheses.push_back({"uniformly ergodic", true, "finite irreducible generator"});
  report.ell = matrix_norm(d);
  if (delta_norm) report.value = *report.ell * *delta_norm;
  return report;
}

BoundReport ctmc_lambda1_bound(const IntensityMatrix& q, std::optional<double> delta_norm,
                               const NumericSettings& settings) {
  const double lambda1 = ctmc_ergodicity_coefficient(q);
  if (!(lambda1 > settings.contraction_margin * q.uniformization_constant())) {
    throw Error(ErrorKind::HypothesisFailed, "Lambda_1(Q) = " + fmt(lambda1) + " is not positive");
  }
  BoundReport report;
  report.bound_name = "ctmc_lambda1";
  report.hypotheses.push_back({"Lambda_1(Q) > 0", true, "Lambda_1(Q) = " + fmt(lambda1)});
  report.ell = 1.0 / lambda1;
  if (delta_norm) report.value = *report.ell * *delta_norm;
  report.details = {{"lambda1_q", lambda1}};
  return report;
}

BoundReport ctmc_small_set_bound(const IntensityMatrix& q, std::optional<double> delta_norm) {
  const Index n = q.size();
  double mass = 0.0;
  for (Index k = 0; k < n; ++k) {
    double column_min = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < n; ++i) {
      if (i != k) column_min = std::min(column_min, q(i, k));
    }
    if (std::isfinite(column_min)) mass += column_min;
  }
  if (!(mass > 0.0)) {
    throw Error(ErrorKind::HypothesisFailed, "every column has a zero off-diagonal infimum");
  }
  BoundReport report;
  report.bound_name = "ctmc_small_set";
  report.hypotheses.push_back({"sum_k delta_k > 0", true, "sum = " + fmt(mass)});
  report.ell = 1.0 / mass;
  if (delta_norm) report.value = *report.ell * *delta_norm;
  report.details = {{"delta_mass", mass}};
  return report;
}

void validate_ctmc_drift_d1(const IntensityMatrix& q, const Vector& v, Index taboo_state,
                            const NumericSettings& settings) {
  const Index n = q.size();
  if (v.size() != n) throw Error(ErrorKind::ValidationError, "drift function size mismatch");
  if (taboo_state < 0 || taboo_state >= n) throw Error(ErrorKind::InvalidParameters, "taboo state out of range");
  if (!v.allFinite()) throw Error(ErrorKind::DriftViolated, "drift function must be bounded");
  if (std::abs(v(taboo_state)) > settings.drift_tol) {
    throw Error(ErrorKind::DriftViolated, "V must vanish on the taboo state", taboo_state);
  }
  const Vector qv = q.matrix() * v;
  for (Index i = 0; i < n; ++i) {
    if (v(i) < -settings.drift_tol) throw Error(ErrorKind::DriftViolated, "V is negative at state " + std::to_string(i), i);
    if (i == taboo_state) continue;
    const double slack = settings.drift_tol * std::max(1.0, q.uniformization_constant() * std::abs(v(i)));
    if (qv(i) > -1.0 + slack) {
      throw Error(ErrorKind::DriftViolated, "QV(" + std::to_string(i) + ") = " + fmt(qv(i)) + " exceeds -1", i);
    }
  }
}

BoundReport ctmc_drift_bound_d1(const IntensityMatrix& q, const Vector& v, Index taboo_state,
                                std::optional<double> delta_norm, const NumericSettings& settings) {
  validate_ctmc_drift_d1(q, v, taboo_state, settings);
  const double sup_v = v.maxCoeff();
  BoundReport report;
  report.bound_name = "ctmc_drift_d1";
  report.hypotheses.push_back({"D1'(V,{i0})", true, "i0 = " + std::to_string(taboo_state)});
  report.ell = 2.0 * sup_v * sup_v;
  if (delta_norm) report.value = *report.ell * *delta_norm;
  report.details = {{"taboo_state", static_cast<double>(taboo_state)}, {"sup_v", sup_v}};
  return report;
}

BoundReport ctmc_drift_bound_hitting(const IntensityMatrix& q, std::optional<double> delta_norm,
                                     const NumericSettings& settings) {
  Index best_state = 0;
  double best_sup = std::numeric_limits<double>::infinity();
  for (Index i0 = 0; i0 < q.size(); ++i0) {
    const double sup = ctmc_hitting_times(q, i0, settings).maxCoeff();
    if (sup < best_sup) {
      best_sup = sup;
      best_state = i0;
    }
  }
  BoundReport report;
  report.bound_name = "ctmc_drift_hitting";
  report.hypotheses.push_back({"D1'(hitting times,{i0})", true, "argmin i0 = " + std::to_string(best_state)});
  report.ell = 2.0 * best_sup * best_sup;
  if (delta_norm) report.value = *report.ell * *delta_norm;
  report.details = {{"taboo_state", static_cast<double>(best_state)}, {"sup_hitting_time", best_sup}};
  return report;
}

void validate_ctmc_drift_d2(const IntensityMatrix& q, const CtmcDriftD2Prime& cert, const NumericSettings& settings) {
  const Index n = q.size();
  if (cert.v.size() != n) throw Error(ErrorKind::ValidationError, "weight function size mismatch");
  if (!(cert.lambda > 0.0) || cert.b < 0.0) throw Error(ErrorKind::DriftViolated, "D2' needs lambda > 0 and b >= 0");
  const Vector qv = q.matrix() * cert.v.values();
  for (Index i = 0; i < n; ++i) {
    const double rhs = -cert.lambda * cert.v(i) + (i == cert.taboo_state ? cert.b : 0.0);
    const double slack = settings.drift_tol * std::max(1.0, q.uniformization_constant() * cert.v(i));
    if (qv(i) > rhs + slack) {
      throw Error(ErrorKind::DriftViolated, "QV(" + std::to_string(i) + ") = " + fmt(qv(i)) + " exceeds " + fmt(rhs), i);
    }
  }
}

CtmcDriftD2Prime fit_ctmc_drift_d2(const IntensityMatrix& q, const WeightFunction& v, Index taboo_state,
                                   const NumericSettings& settings) {
  const Index n = q.size();
  if (v.size() != n) throw Error(ErrorKind::ValidationError, "weight function size mismatch");
  if (taboo_state < 0 || taboo_state >= n) throw Error(ErrorKind::InvalidParameters, "taboo state out of range");
  const Vector qv = q.matrix() * v.values();
  double lambda = std::numeric_limits<double>::infinity();
  Index worst = taboo_state;
  for (Index i = 0; i < n; ++i) {
    if (i == taboo_state) continue;
    const double ratio = -qv(i) / v(i);
    if (ratio < lambda) {
      lambda = ratio;
      worst = i;
    }
  }
  if (!(lambda > settings.contraction_margin * q.uniformization_constant())) {
    throw Error(ErrorKind::NoPositiveLambda, "-QV(i)/V(i) = " + fmt(lambda) + " at state " + std::to_string(worst), worst);
  }
  return CtmcDriftD2Prime{taboo_state, v, lambda, std::max(0.0, qv(taboo_state) + lambda * v(taboo_state))};
}

DriftCertificateD2 transfer_drift(const CtmcDriftD2Prime& cert, double h) {
  return DriftCertificateD2{cert.taboo_state, cert.v, 1.0 - cert.lambda * h, cert.b * h, std::nullopt};
}

std::vector<BoundReport> ctmc_v_bounds(const IntensityMatrix& q, const CtmcDriftD2Prime& cert,
                                       const std::optional<Distribution>& pi, double delta_v_norm,
                                       const NumericSettings& settings) {
  validate_ctmc_drift_d2(q, cert, settings);
  const Distribution stationary = pi ? *pi : stationary_distribution(q, settings);
  const double pi_v = v_norm_measure(stationary.values(), cert.v);
  const double c = 1.0 + pi_v / cert.v.lower_bound();
  const double lambda = cert.lambda;
  const double b = cert.b;

  BoundReport first;
  first.bound_name = "ctmc_v_bound_i";
  first.norm = BoundNorm::Weighted;
  const double threshold_i = lambda / c;
  first.details = {{"lambda", lambda}, {"b", b}, {"pi_v", pi_v}, {"c", c}, {"threshold", threshold_i}};
  first.hypotheses.push_back({"D2'(V,lambda,b,{i0})", true, "lambda = " + fmt(lambda) + ", b = " + fmt(b)});
  const bool first_ok = delta_v_norm < threshold_i;
  first.hypotheses.push_back({"||Delta||_V < lambda/c", first_ok, "margin " + fmt(threshold_i - delta_v_norm)});
  if (first_ok) first.value = c * pi_v * delta_v_norm / (lambda - c * delta_v_norm);

  BoundReport second;
  second.bound_name = "ctmc_v_bound_ii";
  second.norm = BoundNorm::Weighted;
  const double threshold_ii = lambda * lambda / (b + lambda);
  second.details = {{"lambda", lambda}, {"b", b}, {"threshold", threshold_ii}};
  const bool v_at_least_one = cert.v.lower_bound() >= 1.0 - settings.validation_tol;
  second.hypotheses.push_back({"V >= 1", v_at_least_one, "inf V = " + fmt(cert.v.lower_bound())});
  const bool second_ok = delta_v_norm < threshold_ii;
  second.hypotheses.push_back(
      {"||Delta||_V < lambda^2/(b+lambda)", second_ok, "margin " + fmt(threshold_ii - delta_v_norm)});
  if (v_at_least_one && second_ok) {
    second.value = b * (b + lambda) * delta_v_norm / (lambda * lambda * lambda - lambda * (b + lambda) * delta_v_norm);
  }
  return {std::move(first), std::move(second)};
}

BatchArrivalDrift batch_arrival_drift(const Vector& a, const Vector& b, Index n_states, int z_grid) {
  const double tol = 1e-12;
  if (a.size() < 2 || b.size() < 2) throw Error(ErrorKind::InvalidParameters, "need at least a_0, a_1 and b_0, b_1");
  if (n_states < 2) throw Error(ErrorKind::InvalidParameters, "need at least two states");
  if (z_grid < 3) throw Error(ErrorKind::InvalidParameters, "z grid needs at least three points");
  for (Index k = 1; k < a.size(); ++k) {
    if (a(k) < 0.0) throw Error(ErrorKind::InvalidParameters, "negative arrival rate a_" + std::to_string(k));
  }
  for (Index k = 0; k < b.size(); ++k) {
    if (k != 1 && b(k) < 0.0) throw Error(ErrorKind::InvalidParameters, "negative rate b_" + std::to_string(k));
  }
  if (std::abs(a.sum()) > tol * std::max(1.0, a.cwiseAbs().maxCoeff()) ||
      std::abs(b.sum()) > tol * std::max(1.0, b.cwiseAbs().maxCoeff())) {
    throw Error(ErrorKind::InvalidParameters, "rows of the generator must be conservative");
  }
  if (!(b(0) > 0.0)) throw Error(ErrorKind::NotErgodic, "no downward rate b_0");
  if (!(polynomial_derivative(b, 1.0) < 0.0)) {
    throw Error(ErrorKind::NotErgodic, "B'(1) = " + fmt(polynomial_derivative(b, 1.0)) + " is not negative");
  }

  // rho = sup{z >= 1 : B(z) <= 0}; B is convex with B(1) = 0 and B'(1) < 0.
  constexpr double kZCap = 1e6;
  double hi = 2.0;
  while (hi < kZCap && polynomial(b, hi) <= 0.0) hi *= 2.0;
  double rho = kZCap;
  if (polynomial(b, hi) > 0.0) {
    double lo = 1.0;
    for (int it = 0; it < 200 && hi - lo > 4 * std::numeric_limits<double>::epsilon() * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (polynomial(b, mid) <= 0.0 ? lo : hi) = mid;
    }
    rho = lo;
  }

  // f(z) = -B(z)/z is concave on z > 0; its derivative has the sign of
  // -(z B'(z) - B(z)), and g(z) = z B'(z) - B(z) is nondecreasing.
  auto f = [&](double z) { return -polynomial(b, z) / z; };
  auto g = [&](double z) { return z * polynomial_derivative(b, z) - polynomial(b, z); };
  const double step = (rho - 1.0) / (z_grid - 1);
  int best = 0;
  for (int k = 1; k < z_grid; ++k) {
    if (f(1.0 + k * step) > f(1.0 + best * step)) best = k;
  }
  double lo = 1.0 + std::max(0, best - 1) * step;
  double up = 1.0 + std::min(z_grid - 1, best + 1) * step;
  double z0 = 1.0 + best * step;
  if (g(lo) < 0.0 && g(up) > 0.0) {
    for (int it = 0; it < 200 && up - lo > 2 * std::numeric_limits<double>::epsilon() * up; ++it) {
      const double mid = 0.5 * (lo + up);
      (g(mid) < 0.0 ? lo : up) = mid;
    }
    z0 = 0.5 * (lo + up);
  } else if (g(up) <= 0.0) {
    z0 = up;
  } else {
    z0 = lo;
  }
  const double lambda_hat = f(z0);
  if (!(lambda_hat > tol)) throw Error(ErrorKind::NoPositiveLambda, "max of -B(z)/z is " + fmt(lambda_hat));

  Vector v(n_states);
  for (Index i = 0; i < n_states; ++i) v(i) = std::pow(z0, static_cast<double>(i));
  BatchArrivalDrift result{z0, rho, CtmcDriftD2Prime{0, WeightFunction(std::move(v)), lambda_hat, polynomial(a, z0) + lambda_hat}};
  return result;
}

SeriesExpansion stationary_series_expansion(const IntensityMatrix& q, const Matrix& g, double eps, int n_terms,
                                            const CtmcDriftD2Prime& cert, const NumericSettings& settings) {
  const Index n = q.size();
  if (g.rows() != n || g.cols() != n) throw Error(ErrorKind::ValidationError, "direction matrix size mismatch");
  if (n_terms < 0) throw Error(ErrorKind::InvalidParameters, "number of terms must be nonnegative");
  if ((g.rowwise().sum()).cwiseAbs().maxCoeff() > settings.validation_tol * std::max(1.0, matrix_norm(g))) {
    throw Error(ErrorKind::InvalidParameters, "direction matrix must satisfy G e = 0");
  }
  validate_ctmc_drift_d2(q, cert, settings);
  const Distribution pi = stationary_distribution(q, settings);
  const double pi_v = v_norm_measure(pi.values(), cert.v);
  const double c = 1.0 + pi_v / cert.v.lower_bound();
  const double g1 = v_norm_matrix(g, cert.v);

  SeriesExpansion out;
  if (g1 == 0.0) {
    out.radius = std::numeric_limits<double>::infinity();
  } else {
    out.radius = cert.lambda / (c * g1);
    if (cert.v.lower_bound() >= 1.0 - settings.validation_tol) {
      out.radius = std::max(out.radius, cert.lambda * cert.lambda / ((cert.b + cert.lambda) * g1));
    }
  }
  if (!(std::abs(eps) < out.radius)) {
    throw Error(ErrorKind::OutOfRadius, "eps = " + fmt(eps) + " is outside the radius " + fmt(out.radius));
  }
  const Matrix step = eps * g * ctmc_deviation_matrix(q, std::nullopt, settings);
  RowVector term = pi.values();
  out.approximation = term;
  for (int k = 1; k <= n_terms; ++k) {
    term = term * step;
    out.approximation += term;
  }
  out.terms = n_terms;
  out.ratio = v_norm_matrix(step, cert.v);
  out.tail_bound = out.ratio < 1.0 ? pi_v * std::pow(out.ratio, n_terms + 1) / (1.0 - out.ratio)
                                   : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace mcpert
