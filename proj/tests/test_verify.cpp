#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>
#include <limits>

#include "mcpert/ctmc_bounds.hpp"
#include "mcpert/dtmc_bounds.hpp"
#include "mcpert/errors.hpp"
#include "mcpert/gallery.hpp"
#include "mcpert/norms.hpp"
#include "mcpert/solvers.hpp"
#include "mcpert/verify.hpp"
#include "oracles.hpp"

using namespace mcpert;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::ValidationError;
}

Matrix two_state(double a, double b) {
  Matrix p(2, 2);
  p << 1 - a, a, b, 1 - b;
  return p;
}

GalleryModel default_model(const GalleryEntry& entry) {
  GalleryParams params;
  if (entry.defaults.count("N")) params["N"] = 60;
  return make_gallery_model(entry.name, params);
}

const BoundOutcome* find(const FuzzCase& c, const std::string& name) {
  for (const auto& o : c.outcomes) {
    if (o.bound_name == name) return &o;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("exact gap") {
  const double a = 0.3, b = 0.2, a2 = 0.35;
  const DtmcPair pair{StochasticMatrix(two_state(a, b)), StochasticMatrix(two_state(a2, b))};
  CHECK(exact_gap(pair) == doctest::Approx(2.0 * std::abs(b / (a + b) - b / (a2 + b))).epsilon(1e-12));
  const DtmcPair same{StochasticMatrix(two_state(a, b)), StochasticMatrix(two_state(a, b))};
  CHECK(exact_gap(same) == 0.0);

  Vector w(2);
  w << 1.0, 3.0;
  const double d0 = b / (a + b) - b / (a2 + b);
  CHECK(exact_gap(pair, WeightFunction(w)) == doctest::Approx(std::abs(d0) * 1.0 + std::abs(d0) * 3.0).epsilon(1e-12));

  Matrix q(2, 2), q2(2, 2);
  q << -1, 1, 2, -2;
  q2 << -1.5, 1.5, 2, -2;
  const CtmcPair cpair{IntensityMatrix(q), IntensityMatrix(q2)};
  CHECK(exact_gap(cpair) == doctest::Approx(2.0 * std::abs(2.0 / 3.0 - 2.0 / 3.5)).epsilon(1e-12));
}

TEST_CASE("resolvent and deviation identities") {
  Matrix flip(2, 2);
  flip << 0, 1, 1, 0;
  Matrix flip_tilde(2, 2);
  flip_tilde << 0.1, 0.9, 1, 0;
  const DtmcPair periodic{StochasticMatrix(flip), StochasticMatrix(flip_tilde)};
  CHECK(check_resolvent_identity(periodic) < 1e-14);
  CHECK(kind_of([&] { check_deviation_identity(periodic); }) == ErrorKind::PeriodicChain);

  Matrix meyer_tilde = oracle::meyer4();
  meyer_tilde(3, 3) += 0.05;
  meyer_tilde(3, 0) -= 0.05;
  const DtmcPair meyer{StochasticMatrix(oracle::meyer4()), StochasticMatrix(meyer_tilde)};
  CHECK(check_resolvent_identity(meyer) < 1e-14);
  CHECK(check_deviation_identity(meyer) < 1e-14);

  Matrix q(2, 2), q2(2, 2);
  q << -1, 1, 2, -2;
  q2 << -1.2, 1.2, 2, -2;
  CHECK(check_deviation_identity(CtmcPair(IntensityMatrix(q), IntensityMatrix(q2))) < 1e-14);
}

TEST_CASE("taboo identity") {
  const StochasticMatrix meyer(oracle::meyer4());
  for (Index i0 = 0; i0 < 4; ++i0) {
    const TabooCheck check = check_taboo_identity(meyer, i0);
    CHECK(check.residual < 1e-13);
    CHECK(check.max_visits >= 1.0);
  }
  const StochasticMatrix pair(two_state(0.3, 0.6));
  CHECK(check_taboo_identity(pair, 0).residual < 1e-14);
  CHECK(check_taboo_identity(pair, 0).neumann_checked);

  // Identical rows: T^2 has the taboo column removed twice, N is explicit.
  RowVector row(3);
  row << 0.2, 0.5, 0.3;
  const StochasticMatrix flat(row.replicate(3, 1));
  for (Index i0 = 0; i0 < 3; ++i0) CHECK(check_taboo_identity(flat, i0).residual < 1e-14);
}

TEST_CASE("value iteration for hitting times") {
  const GalleryModel geometric = make_gallery_model("geometric-return", {{"N", 50}});
  const double p = geometric.params.at("p");
  const Vector m = value_iteration_hitting(geometric.dtmc(), 0);
  for (Index i = 1; i < m.size(); ++i) CHECK(std::abs(m(i) - 1.0 / p) < 1e-9);

  const StochasticMatrix walk(oracle::birth_death(40, 0.3, 0.2));
  const Vector linear = hitting_times(walk, 0);
  const Vector iterated = value_iteration_hitting(walk, 0);
  CHECK((linear - iterated).cwiseAbs().maxCoeff() < 1e-8 * linear.maxCoeff());

  CHECK(kind_of([&] { value_iteration_hitting(walk, 0, 16); }) == ErrorKind::DivergentHittingTimes);
}

TEST_CASE("identity suite across the gallery") {
  for (const auto& entry : gallery_entries()) {
    CAPTURE(entry.name);
    const GalleryModel model = default_model(entry);
    for (const auto& result : identity_suite(model)) {
      CAPTURE(result.identity);
      CAPTURE(result.note);
      CHECK(result.passed);
      const bool skipped = result.note.rfind("skipped", 0) == 0;
      if (result.residual && !skipped) CHECK(*result.residual <= kIdentityTolerance);
    }
  }
}

TEST_CASE("fuzz perturbations") {
  const GalleryModel meyer = make_gallery_model("meyer4");
  CHECK(fuzz_perturbation(meyer, 0.0, 3, 0).isZero(0.0));
  const Matrix d = fuzz_perturbation(meyer, 0.01, 3, 5);
  CHECK(matrix_norm(d) == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(d.rowwise().sum().cwiseAbs().maxCoeff() < 1e-15);
  CHECK(((meyer.matrix + d).array() >= 0.0).all());
  CHECK(fuzz_perturbation(meyer, 0.01, 3, 5) == d);
  CHECK(fuzz_perturbation(meyer, 0.01, 3, 6) != d);
  CHECK(fuzz_perturbation(meyer, 0.01, 4, 5) != d);
  CHECK(kind_of([&] { fuzz_perturbation(meyer, -1.0, 3, 0); }) == ErrorKind::InvalidParameters);

  const GalleryModel mm1 = make_gallery_model("mm1", {{"N", 40}});
  const Matrix dq = fuzz_perturbation(mm1, 0.01, 1, 0);
  CHECK(dq.rowwise().sum().cwiseAbs().maxCoeff() < 1e-15);
  const Matrix q_tilde = mm1.matrix + dq;
  for (Index i = 0; i < q_tilde.rows(); ++i) {
    for (Index j = 0; j < q_tilde.cols(); ++j) {
      if (i != j) CHECK(q_tilde(i, j) >= 0.0);
    }
  }
}

TEST_CASE("fuzzing the Meyer chain") {
  const GalleryModel meyer = make_gallery_model("meyer4");
  const FuzzReport report = fuzz_bounds(meyer, 1000, 0.01, 7);
  CHECK(report.violations == 0);
  CHECK(report.cases.size() == 1000);
  const StochasticMatrix p = meyer.dtmc();
  for (const auto& c : report.cases) {
    const BoundOutcome* best = find(c, "seneta_best");
    REQUIRE(best);
    REQUIRE(best->value);
    for (const char* other : {"seneta", "drift_hitting"}) {
      const BoundOutcome* o = find(c, other);
      if (o && o->hypotheses_hold && o->value) CHECK(*best->value <= *o->value * (1 + 1e-12));
    }
    // ||P^m - P~^m|| <= m ||Delta|| for the skeleton order in use.
    const Matrix delta(c.delta);
    for (int m = 1; m <= 4; ++m) {
      const double lhs = matrix_norm(matrix_power(p.matrix(), m) - matrix_power(p.matrix() + delta, m));
      CHECK(lhs <= m * c.magnitude * (1 + 1e-12));
    }
  }
  for (const auto& s : report.summary) {
    CHECK(s.violations == 0);
    CHECK(s.max_tightness <= 1.0 + 1e-12);
  }

  const FuzzReport zero = fuzz_bounds(meyer, 5, 0.0, 7);
  CHECK(zero.violations == 0);
  for (const auto& c : zero.cases) {
    for (const auto& o : c.outcomes) {
      CHECK(o.exact_gap == 0.0);
      if (o.value) CHECK(*o.value == 0.0);
    }
  }
}

TEST_CASE("useless total-variation bounds are flagged") {
  const GalleryModel funderlic = make_gallery_model("funderlic8");
  const FuzzReport report = fuzz_bounds(funderlic, 20, 0.2, 1);
  CHECK(report.violations == 0);
  bool flagged = false;
  for (const auto& c : report.cases) {
    for (const auto& o : c.outcomes) {
      if (o.norm == BoundNorm::TotalVariation && o.value) {
        CHECK(o.useless == (*o.value >= 2.0));
        flagged = flagged || o.useless;
      }
    }
  }
  CHECK(flagged);
}

TEST_CASE("fuzzing continuous-time models") {
  const GalleryModel mm1 = make_gallery_model("mm1", {{"N", 60}});
  const FuzzReport report = fuzz_bounds(mm1, 50, 0.01, 2);
  CHECK(report.violations == 0);
  for (const auto& c : report.cases) {
    const BoundOutcome* direct = find(c, "ctmc_v_bound_i");
    const BoundOutcome* via_h = find(c, "v_bound_i_h");
    if (direct && via_h && direct->value && via_h->value) {
      CHECK(std::abs(*direct->value - *via_h->value) <= 1e-8 * *direct->value);
    }
  }
}

TEST_CASE("Lambda_1(A#) is the smallest norm-wise coefficient on the gallery") {
  for (const auto& entry : gallery_entries()) {
    if (entry.kind != ChainKind::Dtmc) continue;
    CAPTURE(entry.name);
    const GalleryModel model = default_model(entry);
    const StochasticMatrix p = model.dtmc();
    const Distribution pi = stationary_distribution(p);
    const double best = *seneta_best_bound(p, pi).ell;
    std::vector<double> others;
    try {
      others.push_back(*seneta_bound(p, 0.0).ell);
    } catch (const Error&) {
    }
    try {
      others.push_back(*small_set_bound(p).first.ell);
    } catch (const Error&) {
    }
    try {
      others.push_back(*drift_bound_hitting(p).ell);
    } catch (const Error&) {
    }
    if (model.d1) others.push_back(*drift_bound_d1(p, *model.d1).ell);
    for (double ell : others) CHECK(best <= ell * (1 + 1e-10));
  }
}
