#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mcpert {

enum class BoundNorm { TotalVariation, Weighted };

struct Hypothesis {
  std::string name;
  bool holds = false;
  std::string detail;
};

/// Outcome of one perturbation bound.
///
/// Norm-wise bounds carry `ell` with ||nu - pi|| <= ell ||Delta||; `value` is
/// the bound actually asserted for the supplied perturbation (ell ||Delta||,
/// or a direct expression such as ||P^m - P~^m|| / nu_m(E), or a V-norm bound
/// that is not linear in ||Delta||_V).
struct BoundReport {
  std::string bound_name;
  BoundNorm norm = BoundNorm::TotalVariation;
  std::vector<Hypothesis> hypotheses;
  std::optional<double> ell;
  std::optional<double> value;
  std::optional<double> exact_gap;
  std::optional<bool> valid;
  /// Named side quantities (m, nu_m(E), argmin state, lambda, b, ...).
  std::vector<std::pair<std::string, double>> details;

  bool hypotheses_hold() const;
  std::optional<double> detail(const std::string& key) const;
  /// A total-variation bound >= 2 says nothing: ||nu - pi|| <= 2 always.
  bool useless() const;
};

/// Slack allowed when comparing a bound to an exactly computed gap.
inline constexpr double kGapComparisonSlack = 1e-12;

/// Records the exact gap and whether the asserted value dominates it.
void attach_exact_gap(BoundReport& report, double exact_gap);

}  // namespace mcpert
