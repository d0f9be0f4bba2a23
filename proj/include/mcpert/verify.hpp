#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "mcpert/chain.hpp"
#include "mcpert/gallery.hpp"
#include "mcpert/report.hpp"

namespace mcpert {

/// ||nu - pi|| from two independent stationary solves, or ||nu - pi||_V when
/// a weight function is supplied.
double exact_gap(const DtmcPair& pair, const std::optional<WeightFunction>& v = std::nullopt,
                 const NumericSettings& settings = default_settings());
double exact_gap(const CtmcPair& pair, const std::optional<WeightFunction>& v = std::nullopt,
                 const NumericSettings& settings = default_settings());

/// Max-entry residual of nu - pi = nu Delta R and of nu - pi = nu Delta (R - Pi).
/// Holds for periodic chains as well.
double check_resolvent_identity(const DtmcPair& pair, const NumericSettings& settings = default_settings());

/// Max-entry residual of nu - pi = nu Delta D. Throws PeriodicChain.
double check_deviation_identity(const DtmcPair& pair, const NumericSettings& settings = default_settings());

/// Max-entry residual of nu - pi = nu Delta D for generators, D the CTMC
/// deviation matrix.
double check_deviation_identity(const CtmcPair& pair, const NumericSettings& settings = default_settings());

struct TabooCheck {
  double residual = 0.0;
  /// Largest entry of N, the expected visits before absorption. Cancellation
  /// in the right-hand side costs about this factor times machine epsilon.
  double max_visits = 0.0;
  bool neumann_checked = false;
};

/// Residual of
///   R - Pi = Pi [pi N e I - N] + N (I - Pi),  N = (I - T)^{-1},
/// with T equal to P except for a zeroed row `taboo_state`. The residual is
/// the max-entry difference divided by max(1, max |R - Pi|). N comes from a
/// subtraction-free direct solve; when the spectral radius estimate of T is
/// below 0.95 the Neumann sum is accumulated as well and the larger of the
/// two residuals is kept. Throws SeriesDivergent when I - T is singular.
TabooCheck check_taboo_identity(const StochasticMatrix& p, Index taboo_state,
                                const NumericSettings& settings = default_settings());

/// Mean hitting times by monotone iteration V_{k+1} = 1 + T V_k from V_0 = 0
/// off the target, evaluated at k = 1, 2, 4, ... by doubling. Stops when two
/// successive evaluations agree to `tolerance` relative; throws
/// DivergentHittingTimes when k would exceed `cap`.
///
/// Squaring T^k in double loses about k n eps, which is the whole answer for
/// hitting times near 1e14, so the iteration runs in __float128. Holding
/// probabilities are taken as 1 minus the off-diagonal row mass, the chain
/// the subtraction-free solver sees.
Vector value_iteration_hitting(const StochasticMatrix& p, Index target, std::uint64_t cap = std::uint64_t{1} << 62,
                               double tolerance = 1e-13);

inline constexpr double kIdentityTolerance = 1e-8;
inline constexpr double kTabooVisitLimit = 1e7;

struct IdentityResult {
  std::string identity;
  std::optional<Index> taboo_state;
  std::optional<double> residual;
  bool passed = false;
  /// Why a check was skipped or which chain it ran on.
  std::string note;
};

/// Resolvent, deviation and taboo identities on one model, paired with the
/// case-0 fuzz perturbation of the given magnitude. Continuous-time models
/// run the discrete identities on their h-approximation chain and the
/// deviation identity on the generator itself. The taboo identity runs for
/// every state when n <= 20, otherwise for the first, middle and last state;
/// a state whose N exceeds kTabooVisitLimit is reported as skipped, since
/// double precision cannot resolve the identity to the tolerance there.
std::vector<IdentityResult> identity_suite(const GalleryModel& model, double magnitude = 0.01,
                                           std::uint64_t seed = 1,
                                           const NumericSettings& settings = default_settings());

struct BoundOutcome {
  std::string bound_name;
  BoundNorm norm = BoundNorm::TotalVariation;
  bool hypotheses_hold = false;
  std::optional<double> value;
  double exact_gap = 0.0;
  bool violated = false;
  bool useless = false;
};

struct FuzzCase {
  std::uint64_t seed = 0;
  std::string model;
  Eigen::SparseMatrix<double> delta;
  double magnitude = 0.0;
  std::optional<double> weighted_magnitude;
  std::vector<BoundOutcome> outcomes;
};

struct FuzzBoundSummary {
  std::string bound_name;
  BoundNorm norm = BoundNorm::TotalVariation;
  int evaluated = 0;
  int hypothesis_failures = 0;
  int violations = 0;
  int useless = 0;
  /// Mean and max of exact gap / bound over cases with a positive bound.
  double mean_tightness = 0.0;
  double max_tightness = 0.0;
};

struct FuzzReport {
  std::string model;
  std::uint64_t seed = 0;
  double magnitude = 0.0;
  std::vector<FuzzCase> cases;
  std::vector<FuzzBoundSummary> summary;
  int violations = 0;
};

/// Random admissible perturbations of `model` with ||Delta|| = magnitude, each
/// checked against every bound whose hypotheses hold. Case k draws from
/// seed_seq{seed, k}, so any case can be rerun on its own.
FuzzReport fuzz_bounds(const GalleryModel& model, int n_cases, double magnitude, std::uint64_t seed,
                       const NumericSettings& settings = default_settings());

/// The perturbation drawn for case `index` (exposed for reruns and tests).
Matrix fuzz_perturbation(const GalleryModel& model, double magnitude, std::uint64_t seed, std::uint64_t index);

}  // namespace mcpert
