#include "mcpert/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <vector>

#include "mcpert/ctmc_bounds.hpp"
#include "mcpert/dtmc_bounds.hpp"
#include "mcpert/errors.hpp"
#include "mcpert/norms.hpp"
#include "mcpert/solvers.hpp"

namespace mcpert {

namespace {

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double gap_of(const RowVector& nu, const RowVector& pi, const std::optional<WeightFunction>& v) {
  const RowVector diff = nu - pi;
  return v ? v_norm_measure(diff, *v) : total_variation_norm(diff);
}

std::mt19937_64 case_engine(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

Matrix taboo_rhs(const Distribution& pi, const Matrix& n_inv) {
  const Index n = n_inv.rows();
  const Matrix big_pi = pi.stacked();
  const double s = (pi.values() * n_inv).sum();
  return big_pi * (s * Matrix::Identity(n, n) - n_inv) + n_inv * (Matrix::Identity(n, n) - big_pi);
}

// One perturbed row for a stochastic matrix: negative entries only where
// P(i, j) > magnitude / 2, the largest off-diagonal entry absorbs the row sum.
void perturb_dtmc_row(const Matrix& p, Index i, double magnitude, std::mt19937_64& rng, Matrix& d) {
  std::bernoulli_distribution coin(0.5);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double floor = 0.5 * magnitude;
  Index adjuster = -1;
  for (Index j = 0; j < p.cols(); ++j) {
    if (j != i && p(i, j) > floor && (adjuster < 0 || p(i, j) > p(i, adjuster))) adjuster = j;
  }
  if (adjuster < 0) {
    if (p(i, i) <= floor) return;
    adjuster = i;
  }
  double sum = 0.0;
  for (Index j = 0; j < p.cols(); ++j) {
    if (j == adjuster || (j != i && p(i, j) <= 0.0) || !coin(rng)) continue;
    double u = unit(rng);
    if (u < 0.0 && p(i, j) <= floor) u = -u;
    d(i, j) = u;
    sum += u;
  }
  d(i, adjuster) = -sum;
}

// Off-diagonal rate changes on the existing support, diagonal keeps the row
// conservative; a rate can only drop when it exceeds the magnitude.
void perturb_ctmc_row(const Matrix& q, Index i, double magnitude, std::mt19937_64& rng, Matrix& d) {
  std::bernoulli_distribution coin(0.5);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  double sum = 0.0;
  for (Index j = 0; j < q.cols(); ++j) {
    if (j == i || q(i, j) <= 0.0 || !coin(rng)) continue;
    double u = unit(rng);
    if (u < 0.0 && q(i, j) <= magnitude) u = -u;
    d(i, j) = u;
    sum += u;
  }
  d(i, i) = -sum;
}

struct PreparedBound {
  std::string name;
  BoundNorm norm = BoundNorm::TotalVariation;
  bool holds = false;
  std::optional<double> ell;
};

BoundOutcome outcome_from(const BoundReport& report, double gap) {
  BoundReport checked = report;
  attach_exact_gap(checked, gap);
  BoundOutcome out;
  out.bound_name = report.bound_name;
  out.norm = report.norm;
  out.hypotheses_hold = report.hypotheses_hold() && report.value.has_value();
  out.value = report.value;
  out.exact_gap = gap;
  out.violated = out.hypotheses_hold && checked.valid && !*checked.valid;
  out.useless = report.useless();
  return out;
}

BoundOutcome failed_outcome(const std::string& name, BoundNorm norm, double gap) {
  BoundOutcome out;
  out.bound_name = name;
  out.norm = norm;
  out.exact_gap = gap;
  return out;
}

BoundOutcome linear_outcome(const PreparedBound& bound, double delta_norm, double gap) {
  if (!bound.holds || !bound.ell) return failed_outcome(bound.name, bound.norm, gap);
  BoundReport report;
  report.bound_name = bound.name;
  report.norm = bound.norm;
  report.hypotheses.push_back({"base chain", true, ""});
  report.ell = bound.ell;
  report.value = *bound.ell * delta_norm;
  return outcome_from(report, gap);
}

// Runs `make` and turns a HypothesisFailed into a failed outcome.
BoundOutcome guarded(const std::string& name, BoundNorm norm, double gap, const std::function<BoundReport()>& make) {
  try {
    return outcome_from(make(), gap);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::HypothesisFailed) throw;
    return failed_outcome(name, norm, gap);
  }
}

PreparedBound prepare(const std::string& name, const std::function<BoundReport()>& make) {
  PreparedBound bound{name, BoundNorm::TotalVariation, false, std::nullopt};
  try {
    const BoundReport report = make();
    bound.holds = report.hypotheses_hold();
    bound.ell = report.ell;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::HypothesisFailed && e.kind() != ErrorKind::NoSmallSet) throw;
  }
  return bound;
}

std::vector<FuzzBoundSummary> summarize(const std::vector<FuzzCase>& cases) {
  std::vector<FuzzBoundSummary> summary;
  std::vector<int> ratio_counts;
  for (const auto& c : cases) {
    for (const auto& o : c.outcomes) {
      auto it = std::find_if(summary.begin(), summary.end(),
                             [&](const FuzzBoundSummary& s) { return s.bound_name == o.bound_name; });
      if (it == summary.end()) {
        summary.push_back(FuzzBoundSummary{o.bound_name, o.norm});
        ratio_counts.push_back(0);
        it = summary.end() - 1;
      }
      const auto k = static_cast<std::size_t>(it - summary.begin());
      if (!o.hypotheses_hold) {
        ++it->hypothesis_failures;
        continue;
      }
      ++it->evaluated;
      if (o.violated) ++it->violations;
      if (o.useless) ++it->useless;
      if (o.value && *o.value > 0.0) {
        const double ratio = o.exact_gap / *o.value;
        it->mean_tightness += ratio;
        it->max_tightness = std::max(it->max_tightness, ratio);
        ++ratio_counts[k];
      }
    }
  }
  for (std::size_t k = 0; k < summary.size(); ++k) {
    if (ratio_counts[k] > 0) summary[k].mean_tightness /= ratio_counts[k];
  }
  return summary;
}

FuzzReport fuzz_dtmc(const GalleryModel& model, int n_cases, double magnitude, std::uint64_t seed,
                     const NumericSettings& settings) {
  const StochasticMatrix p = model.dtmc();
  const Distribution pi = stationary_distribution(p, StationaryMethod::StateReduction, settings);

  std::vector<PreparedBound> linear;
  linear.push_back(prepare("seneta", [&] { return seneta_bound(p, 0.0, settings); }));
  linear.push_back(prepare("seneta_best", [&] { return seneta_best_bound(p, pi, std::nullopt, settings); }));
  linear.push_back(prepare("drift_hitting", [&] { return drift_bound_hitting(p, std::nullopt, settings); }));
  if (model.d1) {
    linear.push_back(prepare("drift_d1", [&] { return drift_bound_d1(p, *model.d1, std::nullopt, settings); }));
  }
  std::optional<SmallSetCertificate> small_set;
  try {
    small_set = small_set_bound(p).second;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NoSmallSet) throw;
  }
  Matrix pm;
  std::optional<double> lambda1_pm;
  if (small_set) {
    pm = matrix_power(p.matrix(), small_set->m);
    lambda1_pm = ergodicity_coefficient(pm);
  }
  std::optional<DriftCertificateD2> d2;
  if (model.weight) d2 = fit_drift_d2(p, *model.weight, 0, settings);

  FuzzReport report{model.name, seed, magnitude, {}, {}, 0};
  for (int k = 0; k < n_cases; ++k) {
    const Matrix delta = fuzz_perturbation(model, magnitude, seed, static_cast<std::uint64_t>(k));
    const StochasticMatrix p_tilde(p.matrix() + delta, settings);
    const Distribution nu = stationary_distribution(p_tilde, StationaryMethod::StateReduction, settings);
    const double norm = matrix_norm(delta);
    const double gap = total_variation_norm(nu.values() - pi.values());

    FuzzCase fc;
    fc.seed = seed;
    fc.model = model.name;
    fc.delta = delta.sparseView();
    fc.magnitude = norm;
    for (const auto& bound : linear) fc.outcomes.push_back(linear_outcome(bound, norm, gap));
    if (small_set) {
      const SkeletonPowers powers{small_set->m, pm, matrix_power(p_tilde.matrix(), small_set->m), norm,
                                  lambda1_pm};
      fc.outcomes.push_back(
          guarded("small_set", BoundNorm::TotalVariation, gap, [&] { return small_set_bound(*small_set, powers); }));
      fc.outcomes.push_back(
          guarded("skeleton", BoundNorm::TotalVariation, gap, [&] { return skeleton_bound(powers, settings); }));
    }
    if (d2) {
      const double dv = v_norm_matrix(delta, d2->v);
      const double gap_v = v_norm_measure(nu.values() - pi.values(), d2->v);
      fc.weighted_magnitude = dv;
      fc.outcomes.push_back(guarded("v_bound_i", BoundNorm::Weighted, gap_v, [&] { return v_bound_i(p, *d2, pi, dv); }));
      fc.outcomes.push_back(guarded("v_bound_ii", BoundNorm::Weighted, gap_v, [&] { return v_bound_ii(*d2, dv); }));
    }
    report.cases.push_back(std::move(fc));
  }
  return report;
}

FuzzReport fuzz_ctmc(const GalleryModel& model, int n_cases, double magnitude, std::uint64_t seed,
                     const NumericSettings& settings) {
  const IntensityMatrix q = model.ctmc();
  const Distribution pi = stationary_distribution(q, settings);

  std::vector<PreparedBound> linear;
  linear.push_back(prepare("ctmc_deviation", [&] { return ctmc_deviation_bound(q, std::nullopt, settings); }));
  linear.push_back(prepare("ctmc_lambda1", [&] { return ctmc_lambda1_bound(q, std::nullopt, settings); }));
  linear.push_back(prepare("ctmc_small_set", [&] { return ctmc_small_set_bound(q); }));
  linear.push_back(prepare("ctmc_drift_hitting", [&] { return ctmc_drift_bound_hitting(q, std::nullopt, settings); }));
  std::optional<CtmcDriftD2Prime> d2;
  if (model.weight) d2 = fit_ctmc_drift_d2(q, *model.weight, 0, settings);

  FuzzReport report{model.name, seed, magnitude, {}, {}, 0};
  for (int k = 0; k < n_cases; ++k) {
    const Matrix delta = fuzz_perturbation(model, magnitude, seed, static_cast<std::uint64_t>(k));
    const IntensityMatrix q_tilde(q.matrix() + delta, settings);
    const Distribution nu = stationary_distribution(q_tilde, settings);
    const double norm = matrix_norm(delta);
    const double gap = total_variation_norm(nu.values() - pi.values());

    FuzzCase fc;
    fc.seed = seed;
    fc.model = model.name;
    fc.delta = delta.sparseView();
    fc.magnitude = norm;
    for (const auto& bound : linear) fc.outcomes.push_back(linear_outcome(bound, norm, gap));
    if (d2) {
      const double dv = v_norm_matrix(delta, d2->v);
      const double gap_v = v_norm_measure(nu.values() - pi.values(), d2->v);
      fc.weighted_magnitude = dv;
      for (const auto& r : ctmc_v_bounds(q, *d2, pi, dv, settings)) fc.outcomes.push_back(outcome_from(r, gap_v));
      // The same certificate seen through the h-approximation chain.
      const double h = default_step(CtmcPair(q, q_tilde));
      const StochasticMatrix p_h = uniformize(q, h).p_h;
      const DriftCertificateD2 discrete = transfer_drift(*d2, h);
      fc.outcomes.push_back(guarded("v_bound_i_h", BoundNorm::Weighted, gap_v, [&] {
        BoundReport r = v_bound_i(p_h, discrete, pi, h * dv);
        r.bound_name = "v_bound_i_h";
        return r;
      }));
      fc.outcomes.push_back(guarded("v_bound_ii_h", BoundNorm::Weighted, gap_v, [&] {
        BoundReport r = v_bound_ii(discrete, h * dv);
        r.bound_name = "v_bound_ii_h";
        return r;
      }));
    }
    report.cases.push_back(std::move(fc));
  }
  return report;
}

}  // namespace

double exact_gap(const DtmcPair& pair, const std::optional<WeightFunction>& v, const NumericSettings& settings) {
  const Distribution pi = stationary_distribution(pair.base, StationaryMethod::StateReduction, settings);
  const Distribution nu = stationary_distribution(pair.perturbed, StationaryMethod::StateReduction, settings);
  return gap_of(nu.values(), pi.values(), v);
}

double exact_gap(const CtmcPair& pair, const std::optional<WeightFunction>& v, const NumericSettings& settings) {
  const Distribution pi = stationary_distribution(pair.base, settings);
  const Distribution nu = stationary_distribution(pair.perturbed, settings);
  return gap_of(nu.values(), pi.values(), v);
}

double check_resolvent_identity(const DtmcPair& pair, const NumericSettings& settings) {
  const Distribution pi = stationary_distribution(pair.base, StationaryMethod::StateReduction, settings);
  const Distribution nu = stationary_distribution(pair.perturbed, StationaryMethod::StateReduction, settings);
  const Matrix r = fundamental_matrix(pair.base, pi, settings);
  const RowVector lhs = nu.values() - pi.values();
  const RowVector nu_delta = nu.values() * pair.delta;
  return std::max(max_abs(lhs - nu_delta * r), max_abs(lhs - nu_delta * (r - pi.stacked())));
}

double check_deviation_identity(const DtmcPair& pair, const NumericSettings& settings) {
  const Distribution pi = stationary_distribution(pair.base, StationaryMethod::StateReduction, settings);
  const Matrix d = deviation_matrix(pair.base, pi, settings);
  const Distribution nu = stationary_distribution(pair.perturbed, StationaryMethod::StateReduction, settings);
  return max_abs(nu.values() - pi.values() - nu.values() * pair.delta * d);
}

double check_deviation_identity(const CtmcPair& pair, const NumericSettings& settings) {
  const Distribution pi = stationary_distribution(pair.base, settings);
  const Matrix d = ctmc_deviation_matrix(pair.base, std::nullopt, settings);
  const Distribution nu = stationary_distribution(pair.perturbed, settings);
  return max_abs(nu.values() - pi.values() - nu.values() * pair.delta * d);
}

TabooCheck check_taboo_identity(const StochasticMatrix& p, Index taboo_state, const NumericSettings& settings) {
  const Index n = p.size();
  if (taboo_state < 0 || taboo_state >= n) throw Error(ErrorKind::InvalidParameters, "taboo state out of range");
  const Distribution pi = stationary_distribution(p, StationaryMethod::StateReduction, settings);
  const Matrix lhs = group_inverse(p, pi, settings);
  const double scale = std::max(1.0, max_abs(lhs));

  Matrix t = p.matrix();
  t.row(taboo_state).setZero();
  // Rows of P sum to one, so only the taboo row loses mass.
  Vector exit = Vector::Zero(n);
  exit(taboo_state) = 1.0;
  Matrix direct;
  try {
    direct = solve_transient_system(t, exit, Matrix::Identity(n, n));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::SolverFailure) throw;
    throw Error(ErrorKind::SeriesDivergent, "sum of T^n diverges for taboo state " + std::to_string(taboo_state),
                taboo_state);
  }
  TabooCheck check;
  check.max_visits = max_abs(direct);
  check.residual = max_abs(lhs - taboo_rhs(pi, direct)) / scale;

  // Gelfand estimate ||T^64||^(1/64) >= rho(T) decides whether the Neumann
  // sum converges fast enough to be worth accumulating.
  const Matrix identity = Matrix::Identity(n, n);
  Matrix power = t;
  Matrix sum = identity;
  std::uint64_t k = 1;
  for (int j = 0; j < 6; ++j) {
    sum += power * sum;
    power = power * power;
    k *= 2;
  }
  if (std::pow(matrix_norm(power), 1.0 / static_cast<double>(k)) < 0.95) {
    for (int j = 0; j < 64 && matrix_norm(power) > 1e-18; ++j) {
      sum += power * sum;
      power = power * power;
    }
    check.residual = std::max(check.residual, max_abs(lhs - taboo_rhs(pi, sum)) / scale);
    check.neumann_checked = true;
  }
  return check;
}

std::vector<IdentityResult> identity_suite(const GalleryModel& model, double magnitude, std::uint64_t seed,
                                           const NumericSettings& settings) {
  std::vector<IdentityResult> results;
  auto record = [&](const std::string& name, std::optional<Index> state, double residual, std::string note) {
    results.push_back({name, state, residual, residual <= kIdentityTolerance, std::move(note)});
  };
  const Matrix delta = fuzz_perturbation(model, magnitude, seed, 0);

  std::optional<DtmcPair> discrete;
  std::string chain_note;
  if (model.kind == ChainKind::Dtmc) {
    const StochasticMatrix p = model.dtmc();
    discrete.emplace(p, StochasticMatrix(p.matrix() + delta, settings));
    if (p.aperiodic()) {
      record("deviation", std::nullopt, check_deviation_identity(*discrete, settings), "");
    } else {
      results.push_back({"deviation", std::nullopt, std::nullopt, true,
                         "skipped: period " + std::to_string(p.period())});
    }
  } else {
    const CtmcPair pair(model.ctmc(), IntensityMatrix(model.matrix + delta, settings));
    record("deviation", std::nullopt, check_deviation_identity(pair, settings), "generator");
    const double h = default_step(pair);
    discrete.emplace(uniformize(pair.base, h).p_h, uniformize(pair.perturbed, h).p_h);
    std::ostringstream note;
    note << "h-approximation chain, h = " << h;
    chain_note = note.str();
  }
  record("resolvent", std::nullopt, check_resolvent_identity(*discrete, settings), chain_note);

  const Index n = discrete->base.size();
  std::vector<Index> states;
  if (n <= 20) {
    for (Index i = 0; i < n; ++i) states.push_back(i);
  } else {
    states = {0, n / 2, n - 1};
  }
  for (Index i0 : states) {
    const TabooCheck check = check_taboo_identity(discrete->base, i0, settings);
    if (check.max_visits > kTabooVisitLimit) {
      std::ostringstream note;
      note << "skipped: max entry of (I - T)^{-1} is " << check.max_visits;
      results.push_back({"taboo", i0, check.residual, true, note.str()});
      continue;
    }
    std::string note = chain_note;
    if (check.neumann_checked) note += note.empty() ? "Neumann cross-check" : ", Neumann cross-check";
    record("taboo", i0, check.residual, note);
  }
  return results;
}

Vector value_iteration_hitting(const StochasticMatrix& p, Index target, std::uint64_t cap, double tolerance) {
  using Quad = __float128;
  const Index n = p.size();
  if (target < 0 || target >= n) throw Error(ErrorKind::InvalidParameters, "target state out of range");
  const auto at = [n](Index i, Index j) { return static_cast<std::size_t>(i * n + j); };
  std::vector<Quad> power(static_cast<std::size_t>(n * n), Quad(0));
  for (Index i = 0; i < n; ++i) {
    if (i == target) continue;
    Quad off = 0;
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      off += p(i, j);
      if (j != target) power[at(i, j)] = p(i, j);
    }
    power[at(i, i)] = Quad(1) - off;
  }
  std::vector<Quad> s(static_cast<std::size_t>(n), Quad(1)), next(s.size()), square(power.size());
  s[static_cast<std::size_t>(target)] = 0;
  std::uint64_t k = 1;
  while (true) {
    if (k > cap / 2) {
      throw Error(ErrorKind::DivergentHittingTimes,
                  "value iteration did not settle within " + std::to_string(cap) + " steps", target);
    }
    Quad change = 0, largest = 0;
    for (Index i = 0; i < n; ++i) {
      Quad acc = 0;
      for (Index j = 0; j < n; ++j) acc += power[at(i, j)] * s[static_cast<std::size_t>(j)];
      next[static_cast<std::size_t>(i)] = s[static_cast<std::size_t>(i)] + acc;
      change = std::max(change, acc);
      largest = std::max(largest, next[static_cast<std::size_t>(i)]);
    }
    std::swap(s, next);
    k *= 2;
    if (!std::isfinite(static_cast<double>(largest))) {
      throw Error(ErrorKind::DivergentHittingTimes, "value iteration overflowed", target);
    }
    if (change <= Quad(tolerance) * std::max(Quad(1), largest)) break;
    std::fill(square.begin(), square.end(), Quad(0));
    for (Index i = 0; i < n; ++i) {
      for (Index l = 0; l < n; ++l) {
        const Quad x = power[at(i, l)];
        if (x == 0) continue;
        for (Index j = 0; j < n; ++j) square[at(i, j)] += x * power[at(l, j)];
      }
    }
    std::swap(power, square);
  }
  Vector out(n);
  for (Index i = 0; i < n; ++i) out(i) = static_cast<double>(s[static_cast<std::size_t>(i)]);
  return out;
}

Matrix fuzz_perturbation(const GalleryModel& model, double magnitude, std::uint64_t seed, std::uint64_t index) {
  if (!(magnitude >= 0.0)) throw Error(ErrorKind::InvalidParameters, "magnitude must be nonnegative");
  const Matrix& base = model.matrix;
  const Index n = base.rows();
  Matrix d = Matrix::Zero(n, n);
  if (magnitude == 0.0) return d;
  std::mt19937_64 rng = case_engine(seed, index);
  std::bernoulli_distribution row_coin(0.5);
  for (int attempt = 0; attempt < 64 && matrix_norm(d) == 0.0; ++attempt) {
    for (Index i = 0; i < n; ++i) {
      if (!row_coin(rng)) continue;
      if (model.kind == ChainKind::Dtmc) {
        perturb_dtmc_row(base, i, magnitude, rng, d);
      } else {
        perturb_ctmc_row(base, i, magnitude, rng, d);
      }
    }
  }
  const double norm = matrix_norm(d);
  if (norm > 0.0) d *= magnitude / norm;
  return d;
}

FuzzReport fuzz_bounds(const GalleryModel& model, int n_cases, double magnitude, std::uint64_t seed,
                       const NumericSettings& settings) {
  if (n_cases < 0) throw Error(ErrorKind::InvalidParameters, "number of cases must be nonnegative");
  FuzzReport report = model.kind == ChainKind::Dtmc ? fuzz_dtmc(model, n_cases, magnitude, seed, settings)
                                                    : fuzz_ctmc(model, n_cases, magnitude, seed, settings);
  report.summary = summarize(report.cases);
  for (const auto& s : report.summary) report.violations += s.violations;
  return report;
}

}  // namespace mcpert
