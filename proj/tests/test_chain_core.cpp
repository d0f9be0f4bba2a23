#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>
#include <random>

#include "mcpert/chain.hpp"
#include "mcpert/errors.hpp"
#include "mcpert/gallery.hpp"
#include "mcpert/norms.hpp"
#include "mcpert/solvers.hpp"
#include "oracles.hpp"

using namespace mcpert;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

Matrix two_state(double a, double b) {
  Matrix p(2, 2);
  p << 1 - a, a, b, 1 - b;
  return p;
}

Matrix flip() {
  Matrix p(2, 2);
  p << 0, 1, 1, 0;
  return p;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::ValidationError;
}

}  // namespace

TEST_CASE("construction rejects bad matrices and names the row") {
  Matrix p = two_state(0.3, 0.1);
  p(1, 0) = 0.2;
  try {
    StochasticMatrix m(p);
    FAIL("accepted a non-stochastic row");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ValidationError);
    CHECK(e.state() == 1);
  }
  Matrix neg = two_state(0.3, 0.1);
  neg(0, 0) = 1.1;
  neg(0, 1) = -0.1;
  CHECK(kind_of([&] { StochasticMatrix m(neg); }) == ErrorKind::ValidationError);
  CHECK(kind_of([&] { StochasticMatrix m(Matrix(2, 3)); }) == ErrorKind::ValidationError);

  Matrix q(2, 2);
  q << -1, 1, 2, -1;
  CHECK(kind_of([&] { IntensityMatrix m(q); }) == ErrorKind::ValidationError);
  q << -1, 1, -2, 2;
  CHECK(kind_of([&] { IntensityMatrix m(q); }) == ErrorKind::ValidationError);
}

TEST_CASE("irreducibility and period are detected") {
  const StochasticMatrix periodic(flip());
  CHECK(periodic.irreducible());
  CHECK(periodic.period() == 2);
  CHECK(StochasticMatrix(oracle::meyer4()).aperiodic());
  Matrix reducible(2, 2);
  reducible << 1, 0, 0.5, 0.5;
  CHECK_FALSE(StochasticMatrix(reducible).irreducible());
  CHECK(StochasticMatrix(make_gallery_model("odd-even-p-periodic").matrix).period() == 2);
}

TEST_CASE("stationary distribution of small chains") {
  const Distribution uniform = stationary_distribution(StochasticMatrix(Matrix::Constant(2, 2, 0.5)));
  CHECK(uniform(0) == doctest::Approx(0.5).epsilon(1e-15));
  const Distribution pi = stationary_distribution(StochasticMatrix(two_state(0.3, 0.1)));
  CHECK(pi(0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(pi(1) == doctest::Approx(0.75).epsilon(1e-14));
  Matrix reducible(2, 2);
  reducible << 1, 0, 0.5, 0.5;
  CHECK(kind_of([&] { stationary_distribution(StochasticMatrix(reducible)); }) == ErrorKind::ReducibleChain);
}

TEST_CASE("Meyer chain: both solvers agree with power iteration") {
  const StochasticMatrix p(oracle::meyer4());
  const RowVector reference = oracle::stationary_by_iteration(p.matrix());
  for (auto method : {StationaryMethod::StateReduction, StationaryMethod::ReplacedEquation}) {
    CHECK(max_abs(stationary_distribution(p, method).values() - reference) < 1e-12);
  }
  // pi = (2/1083) (171, 142.5, 171, 57), read off from pi A# = 0 and sum 1.
  RowVector exact(4);
  exact << 342, 285, 342, 114;
  exact /= 1083.0;
  CHECK(max_abs(reference - exact) < 1e-12);
}

TEST_CASE("stationary solvers match on every gallery chain") {
  for (const auto& name : gallery_names()) {
    CAPTURE(name);
    const GalleryModel model = make_gallery_model(name);
    if (model.kind == ChainKind::Dtmc) {
      const StochasticMatrix p = model.dtmc();
      const Distribution pi = stationary_distribution(p);
      CHECK(max_abs(pi.values() * p.matrix() - pi.values()) < 1e-10);
      CHECK(std::abs(pi.values().sum() - 1.0) < 1e-12);
      CHECK((pi.values().array() > 0.0).all());
      const Distribution lu = stationary_distribution(p, StationaryMethod::ReplacedEquation);
      CHECK(max_abs(lu.values() - pi.values()) < 1e-10);
    } else {
      const IntensityMatrix q = model.ctmc();
      const Distribution pi = stationary_distribution(q);
      CHECK(max_abs(pi.values() * q.matrix()) < 1e-10 * q.uniformization_constant());
      CHECK(std::abs(pi.values().sum() - 1.0) < 1e-12);
      if (q.size() <= 30) CHECK(max_abs(pi.values() - oracle::stationary_of_generator(q.matrix())) < 1e-10);
    }
  }
}

TEST_CASE("fundamental matrix exists for the periodic flip chain") {
  const StochasticMatrix p(flip());
  const Distribution pi = stationary_distribution(p);
  const Matrix r = fundamental_matrix(p, pi);
  const Matrix system = Matrix::Identity(2, 2) - p.matrix() + pi.stacked();
  CHECK(max_abs(r * system - Matrix::Identity(2, 2)) < 1e-12);
  // (I - P + Pi) = [[1.5, -0.5], [-0.5, 1.5]], inverse by hand.
  Matrix expected(2, 2);
  expected << 0.75, 0.25, 0.25, 0.75;
  CHECK(max_abs(r - expected) < 1e-14);
  CHECK(kind_of([&] { deviation_matrix(p, pi); }) == ErrorKind::PeriodicChain);
}

TEST_CASE("identical rows give R = I, A# = I - Pi, D = I - Pi") {
  RowVector row(3);
  row << 0.2, 0.5, 0.3;
  const StochasticMatrix p(row.replicate(3, 1));
  const Distribution pi = stationary_distribution(p);
  const Matrix id = Matrix::Identity(3, 3);
  CHECK(max_abs(fundamental_matrix(p, pi) - id) < 1e-14);
  CHECK(max_abs(group_inverse(p, pi) - (id - pi.stacked())) < 1e-14);
  CHECK(max_abs(deviation_matrix(p, pi) - (id - pi.stacked())) < 1e-14);
}

TEST_CASE("Meyer group inverse matches the printed matrix") {
  const StochasticMatrix p(oracle::meyer4());
  const Distribution pi = stationary_distribution(p);
  const Matrix a_sharp = group_inverse(p, pi);
  CHECK(max_abs(a_sharp - oracle::meyer4_group_inverse()) < 1e-9);
  CHECK(max_abs(fundamental_matrix(p, pi) - (oracle::meyer4_group_inverse() + pi.stacked())) < 1e-9);
  // D as a partial sum of P^k - Pi; the second eigenvalue modulus is below 0.6.
  const Matrix partial = oracle::deviation_partial_sum(p.matrix(), pi.values(), 200);
  CHECK(max_abs(partial - deviation_matrix(p, pi)) < 1e-6);
}

TEST_CASE("symmetric two-state group inverse") {
  const StochasticMatrix p(Matrix::Constant(2, 2, 0.5));
  const Matrix a_sharp = group_inverse(p, stationary_distribution(p));
  Matrix expected(2, 2);
  expected << 0.5, -0.5, -0.5, 0.5;
  // A = I - P = [[0.5, -0.5], [-0.5, 0.5]] is idempotent, so A# = A.
  CHECK(max_abs(a_sharp - expected) < 1e-14);
}

TEST_CASE("group inverse axioms on every gallery DTMC") {
  for (const auto& name : gallery_names()) {
    const GalleryModel model = make_gallery_model(name);
    if (model.kind != ChainKind::Dtmc) continue;
    CAPTURE(name);
    const StochasticMatrix p = model.dtmc();
    const Distribution pi = stationary_distribution(p);
    const Index n = p.size();
    const Matrix a = Matrix::Identity(n, n) - p.matrix();
    const Matrix g = group_inverse(p, pi);
    const Matrix r = fundamental_matrix(p, pi);
    const double scale = std::max(1.0, max_abs(g));
    CHECK(max_abs(r * (a + pi.stacked()) - Matrix::Identity(n, n)) < 1e-9 * scale);
    CHECK(max_abs(a * g * a - a) < 1e-9 * scale);
    CHECK(max_abs(g * a * g - g) < 1e-9 * scale * scale);
    CHECK(max_abs(g * a - a * g) < 1e-9 * scale);
    CHECK(g.rowwise().sum().cwiseAbs().maxCoeff() < 1e-9 * scale);
    CHECK((pi.values() * g).cwiseAbs().maxCoeff() < 1e-9 * scale);
  }
}

TEST_CASE("partial sums of P^k - Pi approach D on aperiodic chains") {
  for (const std::string name : {"meyer4", "funderlic8", "birth-death"}) {
    CAPTURE(name);
    const StochasticMatrix p = make_gallery_model(name).dtmc();
    const Distribution pi = stationary_distribution(p);
    const Matrix d = deviation_matrix(p, pi);
    double previous = matrix_norm(oracle::deviation_partial_sum(p.matrix(), pi.values(), 50) - d);
    for (int terms : {100, 200, 400, 800, 1600}) {
      const double gap = matrix_norm(oracle::deviation_partial_sum(p.matrix(), pi.values(), terms) - d);
      // Monotone until rounding in the partial sum takes over.
      if (previous > 1e-9) CHECK(gap <= previous * (1.0 + 1e-9));
      previous = gap;
    }
    CHECK(previous < 1e-6);
  }
}

TEST_CASE("norms on small examples") {
  CHECK(total_variation_norm(RowVector::Zero(3)) == 0.0);
  RowVector mu(2);
  mu << 0.2, -0.2;
  CHECK(total_variation_norm(mu) == doctest::Approx(0.4));
  mu << 1, -1;
  Vector v(2);
  v << 2, 3;
  CHECK(v_norm_measure(mu, WeightFunction(v)) == doctest::Approx(5.0));

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const Matrix l = Matrix::NullaryExpr(3, 3, [&] { return unit(rng); });
  const Vector x = Vector::NullaryExpr(3, [&] { return unit(rng); });
  const RowVector m = RowVector::NullaryExpr(3, [&] { return unit(rng); });
  const WeightFunction ones = WeightFunction::constant(3);
  CHECK(v_norm_matrix(l, ones) == doctest::Approx(matrix_norm(l)));
  CHECK(v_norm_measure(m, ones) == doctest::Approx(total_variation_norm(m)));
  CHECK(v_norm_vector(x, ones) == doctest::Approx(x.cwiseAbs().maxCoeff()));
}

TEST_CASE("V-norm submultiplicativity on random samples") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Vector weights(4);
  weights << 1, 2, 4, 8;
  const WeightFunction v(weights);
  for (int trial = 0; trial < 200; ++trial) {
    const Matrix a = Matrix::NullaryExpr(4, 4, [&] { return unit(rng); });
    const Matrix b = Matrix::NullaryExpr(4, 4, [&] { return unit(rng); });
    const RowVector mu = RowVector::NullaryExpr(4, [&] { return unit(rng); });
    const Vector x = Vector::NullaryExpr(4, [&] { return unit(rng); });
    CHECK(v_norm_matrix(a * b, v) <= v_norm_matrix(a, v) * v_norm_matrix(b, v) * (1 + 1e-12));
    CHECK(std::abs((mu * a * x)(0)) <= v_norm_measure(mu, v) * v_norm_matrix(a, v) * v_norm_vector(x, v) * (1 + 1e-12));
  }
}

TEST_CASE("ergodicity coefficient") {
  RowVector row(3);
  row << 0.1, 0.6, 0.3;
  CHECK(ergodicity_coefficient(row.replicate(4, 1)) == 0.0);
  CHECK(ergodicity_coefficient(Matrix::Identity(2, 2)) == doctest::Approx(1.0));
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix p = oracle::random_stochastic(6, rng, 0.4);
    CHECK(ergodicity_coefficient(p) == doctest::Approx(oracle::lambda1_by_overlap(p)).epsilon(1e-12));
    const Matrix signed_matrix = p - p.transpose();
    CHECK(ergodicity_coefficient(signed_matrix) == doctest::Approx(oracle::lambda1_by_scan(signed_matrix)).epsilon(1e-12));
  }
}

TEST_CASE("matrix powers take the dense and sparse routes consistently") {
  const Matrix p = make_gallery_model("geometric-return", {{"N", 40}}).matrix;
  Matrix expected = Matrix::Identity(40, 40);
  for (int m = 1; m <= 9; ++m) {
    expected = expected * p;
    CHECK(max_abs(matrix_power(p, m) - expected) < 1e-14);
  }
  CHECK(max_abs(matrix_power(oracle::meyer4(), 2) - oracle::meyer4_square()) < 1e-15);
  CHECK(max_abs(matrix_power(oracle::meyer4(), 0) - Matrix::Identity(4, 4)) == 0.0);
}

TEST_CASE("transient solver keeps relative accuracy on a nearly closed chain") {
  // A walk that must climb 60 levels against a 0.9 drift to exit: the visit
  // counts grow like 9^k, far beyond what LU keeps to full relative accuracy.
  const int n = 60;
  Matrix w = Matrix::Zero(n, n);
  Vector exit = Vector::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (i > 0) w(i, i - 1) = 0.9;
    if (i + 1 < n) {
      w(i, i + 1) = 0.1;
    } else {
      exit(i) = 0.1;
    }
  }
  const Matrix x = solve_transient_system(w, exit, Matrix::Ones(n, 1));
  // Rows of (diag(s) - W) X = 1 with s = rowsum(W) + exit.
  for (int i = 0; i < n; ++i) {
    const double s = w.row(i).sum() + exit(i);
    const double lhs = s * x(i, 0) - (w.row(i) * x)(0, 0);
    CHECK(std::abs(lhs - 1.0) <= 1e-9 * s * x(i, 0));
  }
  CHECK(x(0, 0) > 1e50);
}
