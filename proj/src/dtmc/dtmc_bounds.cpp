#include "mcpert/dtmc_bounds.hpp"

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

void check_same_size(Index a, Index b, const char* what) {
  if (a != b) throw Error(ErrorKind::ValidationError, std::string(what) + " size mismatch");
}

// Target must be reachable from every state, otherwise some hitting time is infinite.
bool reaches_target_from_everywhere(const Matrix& p, Index target) {
  const Index n = p.rows();
  std::vector<bool> seen(n, false);
  std::vector<Index> stack{target};
  seen[target] = true;
  while (!stack.empty()) {
    const Index v = stack.back();
    stack.pop_back();
    for (Index u = 0; u < n; ++u) {
      if (!seen[u] && u != v && p(u, v) > 0.0) {
        seen[u] = true;
        stack.push_back(u);
      }
    }
  }
  return std::all_of(seen.begin(), seen.end(), [](bool s) { return s; });
}

}  // namespace

BoundReport seneta_bound(const StochasticMatrix& p, double delta_norm, const NumericSettings& settings) {
  const double lambda1 = ergodicity_coefficient(p.matrix());
  if (lambda1 >= 1.0 - settings.contraction_margin) {
    throw Error(ErrorKind::HypothesisFailed, "Lambda_1(P) = " + fmt(lambda1) + " is not below 1");
  }
  BoundReport report;
  report.bound_name = "seneta";
  report.hypotheses.push_back({"Lambda_1(P) < 1", true, "Lambda_1(P) = " + fmt(lambda1)});
  report.ell = 1.0 / (1.0 - lambda1);
  report.value = *report.ell * delta_norm;
  report.details = {{"lambda1_p", lambda1}};
  return report;
}

BoundReport seneta_best_bound(const StochasticMatrix& p, const Distribution& pi, std::optional<double> delta_norm,
                              const NumericSettings& settings) {
  if (!p.irreducible()) throw Error(ErrorKind::ReducibleChain, "group inverse bound needs an irreducible chain");
  const Matrix a_sharp = group_inverse(p, pi, settings);
  BoundReport report;
  report.bound_name = "seneta_best";
  report.hypotheses.push_back({"irreducible", true, "period " + std::to_string(p.period())});
  report.ell = ergodicity_coefficient(a_sharp);
  if (delta_norm) report.value = *report.ell * *delta_norm;
  report.details = {{"period", static_cast<double>(p.period())}};
  return report;
}

SkeletonPowers skeleton_powers(const StochasticMatrix& p, const StochasticMatrix& p_tilde, int m) {
  if (m < 1) throw Error(ErrorKind::InvalidParameters, "skeleton order m must be positive");
  check_same_size(p.size(), p_tilde.size(), "perturbed chain");
  return SkeletonPowers{m, matrix_power(p.matrix(), m), matrix_power(p_tilde.matrix(), m),
                        matrix_norm(p_tilde.matrix() - p.matrix()), std::nullopt};
}

BoundReport skeleton_bound(const SkeletonPowers& powers, const NumericSettings& settings) {
  const int m = powers.m;
  const double lambda1 = powers.lambda1_pm ? *powers.lambda1_pm : ergodicity_coefficient(powers.pm);
  if (lambda1 >= 1.0 - settings.contraction_margin) {
    throw Error(ErrorKind::HypothesisFailed, "Lambda_1(P^" + std::to_string(m) + ") = " + fmt(lambda1) + " is not below 1");
  }
  const double numerator = matrix_norm(powers.pm - powers.pm_tilde);
  BoundReport report;
  report.bound_name = "skeleton";
  report.hypotheses.push_back({"Lambda_1(P^m) < 1", true, "Lambda_1(P^m) = " + fmt(lambda1)});
  report.ell = m / (1.0 - lambda1);
  report.value = numerator / (1.0 - lambda1);
  report.details = {{"m", static_cast<double>(m)},
                    {"lambda1_pm", lambda1},
                    {"skeleton_delta_norm", numerator},
                    {"delta_norm", powers.delta_norm}};
  return report;
}

BoundReport skeleton_bound(const StochasticMatrix& p, const StochasticMatrix& p_tilde, int m,
                           const NumericSettings& settings) {
  return skeleton_bound(skeleton_powers(p, p_tilde, m), settings);
}

SmallSetCertificate small_set_certificate(const StochasticMatrix& p, int m) {
  if (m < 1) throw Error(ErrorKind::InvalidParameters, "small-set order m must be positive");
  const Matrix pm = matrix_power(p.matrix(), m);
  SmallSetCertificate cert;
  cert.m = m;
  cert.per_state_minima = pm.colwise().minCoeff().transpose();
  cert.nu_mass = cert.per_state_minima.sum();
  return cert;
}

namespace {

BoundReport small_set_report(const SmallSetCertificate& cert) {
  BoundReport report;
  report.bound_name = "small_set";
  report.hypotheses.push_back({"nu_m(E) > 0", true, "m = " + std::to_string(cert.m) + ", nu_m(E) = " + fmt(cert.nu_mass)});
  report.ell = cert.m / cert.nu_mass;
  report.details = {{"m", static_cast<double>(cert.m)}, {"nu_mass", cert.nu_mass}};
  return report;
}

}  // namespace

std::pair<BoundReport, SmallSetCertificate> small_set_bound(const StochasticMatrix& p, const SmallSetOptions& options,
                                                            const std::optional<StochasticMatrix>& p_tilde) {
  if (options.m_min < 1 || options.m_max < options.m_min) {
    throw Error(ErrorKind::InvalidParameters, "small-set search needs 1 <= m_min <= m_max");
  }
  Matrix pm = matrix_power(p.matrix(), options.m_min);
  std::optional<SmallSetCertificate> best;
  for (int m = options.m_min; m <= options.m_max; ++m) {
    if (m > options.m_min) pm = pm * p.matrix();
    SmallSetCertificate cert;
    cert.m = m;
    cert.per_state_minima = pm.colwise().minCoeff().transpose();
    cert.nu_mass = cert.per_state_minima.sum();
    if (cert.nu_mass > 0.0 && (!best || m / cert.nu_mass < best->m / best->nu_mass)) best = std::move(cert);
  }
  if (!best) {
    throw Error(ErrorKind::NoSmallSet, "nu_m(E) = 0 for every m in [" + std::to_string(options.m_min) + ", " +
                                           std::to_string(options.m_max) + "]");
  }
  if (!p_tilde) return {small_set_report(*best), std::move(*best)};
  BoundReport report = small_set_bound(*best, skeleton_powers(p, *p_tilde, best->m));
  return {std::move(report), std::move(*best)};
}

BoundReport small_set_bound(const SmallSetCertificate& cert, const SkeletonPowers& powers) {
  if (cert.m != powers.m) throw Error(ErrorKind::InvalidParameters, "certificate and powers have different orders");
  if (!(cert.nu_mass > 0.0)) throw Error(ErrorKind::NoSmallSet, "nu_m(E) = 0 for m = " + std::to_string(cert.m));
  BoundReport report = small_set_report(cert);
  const double numerator = matrix_norm(powers.pm - powers.pm_tilde);
  report.value = numerator / cert.nu_mass;
  report.details.emplace_back("skeleton_delta_norm", numerator);
  report.details.emplace_back("ell_times_delta", *report.ell * powers.delta_norm);
  return report;
}

Vector hitting_times(const StochasticMatrix& p, Index target, const NumericSettings& settings) {
  const Index n = p.size();
  if (target < 0 || target >= n) throw Error(ErrorKind::InvalidParameters, "target state out of range");
  if (!reaches_target_from_everywhere(p.matrix(), target)) {
    throw Error(ErrorKind::SolverFailure, "target is not reachable from every state", target);
  }
  const Vector m = mean_hitting_times(p.matrix(), target);
  Vector residual = m - p.matrix() * m - Vector::Ones(n);
  residual(target) = 0.0;
  if (!m.allFinite() || residual.cwiseAbs().maxCoeff() > settings.inverse_tol * std::max(1.0, m.maxCoeff())) {
    throw Error(ErrorKind::SolverFailure, "hitting-time residual " + fmt(residual.cwiseAbs().maxCoeff()));
  }
  return m;
}

Vector birth_death_hitting_times(const Vector& a, const Vector& b, const Vector& c, Index target) {
  const Index size = a.size();
  if (size < 1 || b.size() != size || c.size() != size) {
    throw Error(ErrorKind::InvalidParameters, "a, b, c must have equal nonzero length n + 1");
  }
  const Index n = size - 1;
  if (target < 0 || target > n) throw Error(ErrorKind::InvalidParameters, "target state out of range");
  for (Index i = 0; i <= n; ++i) {
    const double down = i > 0 ? a(i) : 0.0;
    const double up = i < n ? b(i) : 0.0;
    if (down < 0.0 || up < 0.0 || c(i) < 0.0) {
      throw Error(ErrorKind::InvalidParameters, "negative probability in row " + std::to_string(i), i);
    }
    if (std::abs(down + up + c(i) - 1.0) > default_settings().validation_tol) {
      throw Error(ErrorKind::InvalidParameters, "row " + std::to_string(i) + " is not stochastic", i);
    }
    if ((i > 0 && !(down > 0.0)) || (i < n && !(up > 0.0))) {
      throw Error(ErrorKind::InvalidParameters, "birth-death chain is reducible at state " + std::to_string(i), i);
    }
  }
  // mu(k) = b_0 ... b_{k-1} / (a_1 ... a_k); prefix(k) = mu(0) + ... + mu(k - 1)
  // and suffix(k) = mu(k) + ... + mu(n), both summed directly so that neither
  // side is a difference of nearly equal totals.
  Vector mu(size);
  mu(0) = 1.0;
  for (Index k = 1; k <= n; ++k) mu(k) = mu(k - 1) * b(k - 1) / a(k);
  Vector prefix = Vector::Zero(size + 1);
  for (Index k = 0; k <= n; ++k) prefix(k + 1) = prefix(k) + mu(k);
  Vector suffix = Vector::Zero(size + 1);
  for (Index k = n; k >= 0; --k) suffix(k) = suffix(k + 1) + mu(k);

  Vector result = Vector::Zero(size);
  double acc = 0.0;
  for (Index i = target - 1; i >= 0; --i) {
    acc += prefix(i + 1) / (b(i) * mu(i));
    result(i) = acc;
  }
  acc = 0.0;
  for (Index i = target + 1; i <= n; ++i) {
    const Index m = i - 1;
    acc += suffix(m + 1) / (b(m) * mu(m));
    result(i) = acc;
  }
  return result;
}

void validate_drift_d1(const StochasticMatrix& p, const DriftCertificateD1& cert, const NumericSettings& settings) {
  const Index n = p.size();
  check_same_size(cert.v.size(), n, "drift function");
  if (cert.taboo_state < 0 || cert.taboo_state >= n) {
    throw Error(ErrorKind::InvalidParameters, "taboo state out of range");
  }
  if (!cert.v.allFinite()) throw Error(ErrorKind::DriftViolated, "drift function must be bounded");
  if (std::abs(cert.v(cert.taboo_state)) > settings.drift_tol) {
    throw Error(ErrorKind::DriftViolated, "V must vanish on the taboo state", cert.taboo_state);
  }
  const Vector pv = p.matrix() * cert.v;
  for (Index i = 0; i < n; ++i) {
    if (cert.v(i) < -settings.drift_tol) {
      throw Error(ErrorKind::DriftViolated, "V is negative at state " + std::to_string(i), i);
    }
    if (i == cert.taboo_state) continue;
    const double slack = settings.drift_tol * std::max(1.0, std::abs(cert.v(i)));
    if (pv(i) > cert.v(i) - 1.0 + slack) {
      throw Error(ErrorKind::DriftViolated,
                  "PV(" + std::to_string(i) + ") = " + fmt(pv(i)) + " exceeds V(" + std::to_string(i) +
                      ") - 1 = " + fmt(cert.v(i) - 1.0),
                  i);
    }
  }
}

DriftCertificateD1 drift_d1_from_hitting_times(const StochasticMatrix& p, Index taboo_state,
                                               const NumericSettings& settings) {
  DriftCertificateD1 cert;
  cert.taboo_state = taboo_state;
  cert.v = hitting_times(p, taboo_state, settings);
  cert.sup_v = cert.v.maxCoeff();
  return cert;
}

BoundReport drift_bound_d1(const StochasticMatrix& p, const DriftCertificateD1& cert, std::optional<double> delta_norm,
                           const NumericSettings& settings) {
  validate_drift_d1(p, cert, settings);
  const double sup_v = cert.v.maxCoeff();
  BoundReport report;
  report.bound_name = "drift_d1";
  report.hypotheses.push_back({"D1(V,{i0})", true, "i0 = " + std::to_string(cert.taboo_state)});
  report.ell = 2.0 * sup_v * sup_v;
  if (delta_norm) report.value = *report.ell * *delta_norm;
  report.details = {{"taboo_state", static_cast<double>(cert.taboo_state)}, {"sup_v", sup_v}};
  return report;
}

BoundReport drift_bound_hitting(const StochasticMatrix& p, std::optional<double> delta_norm,
                                const NumericSettings& settings) {
  if (!p.irreducible()) throw Error(ErrorKind::ReducibleChain, "hitting-time bound needs an irreducible chain");
  Index best_state = 0;
  double best_sup = std::numeric_limits<double>::infinity();
  for (Index i0 = 0; i0 < p.size(); ++i0) {
    const double sup = hitting_times(p, i0, settings).maxCoeff();
    if (sup < best_sup) {
      best_sup = sup;
      best_state = i0;
    }
  }
  BoundReport report;
  report.bound_name = "drift_hitting";
  report.hypotheses.push_back({"D1(m_{.,i0},{i0})", true, "argmin i0 = " + std::to_string(best_state)});
  report.ell = 2.0 * best_sup * best_sup;
  if (delta_norm) report.value = *report.ell * *delta_norm;
  report.details = {{"taboo_state", static_cast<double>(best_state)}, {"sup_hitting_time", best_sup}};
  return report;
}

DriftCertificateD2 fit_drift_d2(const StochasticMatrix& p, const WeightFunction& v, Index taboo_state,
                                const NumericSettings& settings) {
  const Index n = p.size();
  check_same_size(v.size(), n, "weight function");
  if (taboo_state < 0 || taboo_state >= n) throw Error(ErrorKind::InvalidParameters, "taboo state out of range");
  const Vector pv = p.matrix() * v.values();
  double lambda = 0.0;
  Index worst = taboo_state;
  for (Index i = 0; i < n; ++i) {
    if (i == taboo_state) continue;
    const double ratio = pv(i) / v(i);
    if (ratio > lambda) {
      lambda = ratio;
      worst = i;
    }
  }
  if (lambda >= 1.0 - settings.contraction_margin) {
    throw Error(ErrorKind::DriftViolated, "PV(i)/V(i) = " + fmt(lambda) + " >= 1 at state " + std::to_string(worst), worst);
  }
  DriftCertificateD2 cert{taboo_state, v, lambda, std::max(0.0, pv(taboo_state) - lambda * v(taboo_state)), std::nullopt};
  return cert;
}

void validate_drift_d2(const StochasticMatrix& p, const DriftCertificateD2& cert, const NumericSettings& settings) {
  const Index n = p.size();
  check_same_size(cert.v.size(), n, "weight function");
  if (!(cert.lambda < 1.0) || cert.b < 0.0) {
    throw Error(ErrorKind::DriftViolated, "D2 needs lambda < 1 and b >= 0");
  }
  const Vector pv = p.matrix() * cert.v.values();
  for (Index i = 0; i < n; ++i) {
    const double rhs = cert.lambda * cert.v(i) + (i == cert.taboo_state ? cert.b : 0.0);
    if (pv(i) > rhs + settings.drift_tol * std::max(1.0, rhs)) {
      throw Error(ErrorKind::DriftViolated, "PV(" + std::to_string(i) + ") = " + fmt(pv(i)) + " exceeds " + fmt(rhs), i);
    }
  }
}

BoundReport v_bound_i(const StochasticMatrix& p, const DriftCertificateD2& cert, const Distribution& pi,
                      double delta_v_norm) {
  validate_drift_d2(p, cert);
  check_same_size(pi.size(), p.size(), "distribution");
  const double pi_v = v_norm_measure(pi.values(), cert.v);
  const double e_v = 1.0 / cert.v.lower_bound();
  const double c = 1.0 + e_v * pi_v;
  const double threshold = (1.0 - cert.lambda) / c;
  BoundReport report;
  report.bound_name = "v_bound_i";
  report.norm = BoundNorm::Weighted;
  report.details = {{"lambda", cert.lambda}, {"b", cert.b}, {"pi_v", pi_v}, {"c", c}, {"threshold", threshold}};
  if (!(delta_v_norm < threshold)) {
    throw Error(ErrorKind::HypothesisFailed, "||Delta||_V = " + fmt(delta_v_norm) + " is not below (1 - lambda)/c = " +
                                                 fmt(threshold) + " (margin " + fmt(threshold - delta_v_norm) + ")");
  }
  report.hypotheses.push_back({"D2(V,lambda,b,{i0})", true, "lambda = " + fmt(cert.lambda) + ", b = " + fmt(cert.b)});
  report.hypotheses.push_back({"||Delta||_V < (1-lambda)/c", true, "margin " + fmt(threshold - delta_v_norm)});
  report.hypotheses.push_back({"perturbed chain positive recurrent", true, "implied by the two above"});
  report.value = c * pi_v * delta_v_norm / (1.0 - cert.lambda - c * delta_v_norm);
  return report;
}

BoundReport v_bound_ii(const DriftCertificateD2& cert, double delta_v_norm) {
  const double gap = 1.0 - cert.lambda;
  const double threshold = gap * gap / (cert.b + gap);
  BoundReport report;
  report.bound_name = "v_bound_ii";
  report.norm = BoundNorm::Weighted;
  report.details = {{"lambda", cert.lambda}, {"b", cert.b}, {"threshold", threshold}};
  if (!(gap > 0.0)) throw Error(ErrorKind::HypothesisFailed, "lambda must be below 1");
  if (cert.v.lower_bound() < 1.0 - default_settings().validation_tol) {
    throw Error(ErrorKind::HypothesisFailed, "V >= 1 fails: inf V = " + fmt(cert.v.lower_bound()));
  }
  if (!(delta_v_norm < threshold)) {
    throw Error(ErrorKind::HypothesisFailed, "||Delta||_V = " + fmt(delta_v_norm) +
                                                 " is not below (1 - lambda)^2/(b + 1 - lambda) = " + fmt(threshold) +
                                                 " (margin " + fmt(threshold - delta_v_norm) + ")");
  }
  report.hypotheses.push_back({"V >= 1", true, "inf V = " + fmt(cert.v.lower_bound())});
  report.hypotheses.push_back({"||Delta||_V < (1-lambda)^2/(b+1-lambda)", true, "margin " + fmt(threshold - delta_v_norm)});
  report.value = cert.b * (cert.b + gap) * delta_v_norm / (gap * gap * gap - gap * (cert.b + gap) * delta_v_norm);
  return report;
}

}  // namespace mcpert
