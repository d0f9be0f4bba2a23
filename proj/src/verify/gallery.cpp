#include "mcpert/gallery.hpp"

#include <algorithm>
#include <cmath>

#include "mcpert/ctmc_bounds.hpp"
#include "mcpert/errors.hpp"

namespace mcpert {

namespace {

constexpr double kDefaultTruncation = 200;

const GalleryEntry& find_entry(const std::string& name) {
  for (const auto& entry : gallery_entries()) {
    if (entry.name == name) return entry;
  }
  throw Error(ErrorKind::InvalidParameters, "unknown gallery model '" + name + "'");
}

GalleryParams merge(const GalleryEntry& entry, const GalleryParams& overrides) {
  GalleryParams params = entry.defaults;
  for (const auto& [key, value] : overrides) {
    if (!params.count(key)) {
      throw Error(ErrorKind::InvalidParameters, "model '" + entry.name + "' has no parameter '" + key + "'");
    }
    if (!std::isfinite(value)) throw Error(ErrorKind::InvalidParameters, "parameter '" + key + "' is not finite");
    params[key] = value;
  }
  return params;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::InvalidParameters, what);
}

int state_count(const GalleryParams& params, const char* key, int minimum) {
  const double raw = params.at(key);
  require(raw == std::floor(raw) && raw >= minimum && raw <= 100000,
          std::string(key) + " must be an integer >= " + std::to_string(minimum));
  return static_cast<int>(raw);
}

double probability(const GalleryParams& params, const char* key) {
  const double v = params.at(key);
  require(v > 0.0 && v < 1.0, std::string(key) + " must lie in (0, 1)");
  return v;
}

Matrix funderlic8() {
  Matrix p(8, 8);
  p << 0.74, 0.11, 0, 0, 0, 0, 0, 0.15,
       0, 0.689, 0, 0, 0.011, 0, 0, 0.3,
       0, 0, 0, 0.4, 0, 0, 0, 0.6,
       0, 0, 0, 0.669, 0.011, 0, 0, 0.32,
       0, 0, 0, 0, 0.912, 0, 0, 0.088,
       0, 0, 0, 0, 0, 0.74, 0, 0.26,
       0, 0, 0, 0, 0, 0, 0.87, 0.13,
       0.15, 0, 0.047, 0, 0, 0.055, 0.27, 0.478;
  return p;
}

Matrix meyer4() {
  Matrix p(4, 4);
  p << 0, 2, 2, 0,
       2, 0, 2, 0,
       2, 1, 0, 1,
       1, 1, 1, 1;
  return p / 4.0;
}

// Row i: b_i to state 0 and a_{i+1-j} to j = 1..i+1; the a_0 step out of the
// last state returns to 0.
GalleryModel hessenberg(GalleryModel model) {
  const int n = state_count(model.params, "N", 2);
  const double mass = probability(model.params, "a_sum");
  const double ratio = model.params.at("ratio");
  require(ratio >= 0.0 && ratio < 1.0, "ratio must lie in [0, 1)");
  auto a = [&](int k) { return mass * (1.0 - ratio) * std::pow(ratio, k); };
  Matrix p = Matrix::Zero(n, n);
  double partial = 0.0;
  for (int i = 0; i < n; ++i) {
    partial += a(i);
    p(i, 0) = 1.0 - partial;
    for (int j = 1; j <= i + 1; ++j) {
      if (j < n) {
        p(i, j) += a(i + 1 - j);
      } else {
        p(i, 0) += a(i + 1 - j);
      }
    }
  }
  model.matrix = std::move(p);
  Vector v = Vector::Constant(n, 1.0 / (1.0 - mass));
  v(0) = 0.0;
  model.d1 = DriftCertificateD1{0, v, v.maxCoeff()};
  return model;
}

GalleryModel odd_even(GalleryModel model, bool periodic) {
  const int n = state_count(model.params, "N", 4);
  const double p = probability(model.params, "p");
  const double q = 1.0 - p;
  require(!periodic || n % 2 == 0, "the periodic variant needs an even N so the last state is odd");
  Matrix m = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    (i + 1 < n ? m(i, i + 1) : m(i, 0)) += q;
    if (i == 0) {
      m(0, 0) += p;
    } else if (i % 2 == 1) {
      m(i, 0) += p;
    } else {
      m(i, 1) += p;
    }
  }
  if (periodic) {
    m(0, 0) = 0.0;
    m(0, 1) = 1.0;
    require(model.params.at("lambda") > 0.0, "lambda must be positive");
  }
  model.matrix = std::move(m);
  return model;
}

GalleryModel birth_death(GalleryModel model) {
  const int n = state_count(model.params, "n", 1);
  const double a = probability(model.params, "a");
  const double b = probability(model.params, "b");
  require(a + b <= 1.0, "a + b must not exceed 1");
  Matrix p = Matrix::Zero(n + 1, n + 1);
  for (int i = 0; i <= n; ++i) {
    if (i > 0) p(i, i - 1) = a;
    if (i < n) p(i, i + 1) = b;
    p(i, i) = 1.0 - (i > 0 ? a : 0.0) - (i < n ? b : 0.0);
  }
  model.matrix = std::move(p);
  return model;
}

// The q step out of the last state stays put, so every state i >= 1 still
// returns to 0 after a geometric number of steps with mean 1/p.
GalleryModel geometric_return(GalleryModel model) {
  const int n = state_count(model.params, "N", 2);
  const double p = probability(model.params, "p");
  Matrix m = Matrix::Zero(n, n);
  m(0, 1) = 1.0;
  for (int i = 1; i < n; ++i) {
    m(i, 0) = p;
    m(i, std::min(i + 1, n - 1)) += 1.0 - p;
  }
  model.matrix = std::move(m);
  return model;
}

// Row 0 from `a`, rows i >= 1 from Q(i, i-1+k) = b(k); jumps past the last
// state go to state 0, which for row 0 means they vanish.
Matrix skip_free_generator(const Vector& a, const Vector& b, int n) {
  Matrix q = Matrix::Zero(n, n);
  for (Index k = 1; k < std::min<Index>(a.size(), n); ++k) q(0, k) = a(k);
  q(0, 0) = -q.row(0).sum();
  for (int i = 1; i < n; ++i) {
    for (Index k = 0; k < b.size(); ++k) {
      const Index j = i - 1 + k;
      q(i, j < n ? j : 0) += b(k);
    }
  }
  return q;
}

GalleryModel skip_free(GalleryModel model, const Vector& a, const Vector& b) {
  const int n = state_count(model.params, "N", 3);
  model.matrix = skip_free_generator(a, b, n);
  const BatchArrivalDrift drift = batch_arrival_drift(a, b, n);
  model.weight = drift.certificate.v;
  return model;
}

GalleryModel mm1(GalleryModel model) {
  const double sigma = model.params.at("sigma");
  const double mu = model.params.at("mu");
  require(sigma > 0.0 && mu > sigma, "need 0 < sigma < mu");
  Vector a(2), b(3);
  a << -sigma, sigma;
  b << mu, -(mu + sigma), sigma;
  return skip_free(std::move(model), a, b);
}

GalleryModel batch_arrival(GalleryModel model) {
  const double mu = model.params.at("mu");
  const double l1 = model.params.at("lambda1");
  const double l2 = model.params.at("lambda2");
  require(mu > 0.0 && l1 >= 0.0 && l2 >= 0.0 && l1 + l2 > 0.0, "rates must be nonnegative with mu > 0");
  require(l1 + 2.0 * l2 < mu, "need lambda1 + 2 lambda2 < mu for ergodicity");
  Vector a(3), b(4);
  a << -(l1 + l2), l1, l2;
  b << mu, -(mu + l1 + l2), l1, l2;
  return skip_free(std::move(model), a, b);
}

GalleryModel two_state(GalleryModel model) {
  const double a = model.params.at("a");
  const double b = model.params.at("b");
  require(a > 0.0 && b > 0.0, "rates must be positive");
  Matrix q(2, 2);
  q << -a, a, b, -b;
  model.matrix = std::move(q);
  return model;
}

}  // namespace

Vector odd_even_periodic_drift(int n, double p, double lambda) {
  Vector v = Vector::Constant(n, (1.0 + lambda) / p);
  v(0) = 0.0;
  v(1) = lambda / p;
  return v;
}

std::string_view to_string(ChainKind kind) { return kind == ChainKind::Dtmc ? "dtmc" : "ctmc"; }

StochasticMatrix GalleryModel::dtmc() const {
  if (kind != ChainKind::Dtmc) throw Error(ErrorKind::InvalidParameters, name + " is a continuous-time model");
  return StochasticMatrix(matrix);
}

IntensityMatrix GalleryModel::ctmc() const {
  if (kind != ChainKind::Ctmc) throw Error(ErrorKind::InvalidParameters, name + " is a discrete-time model");
  return IntensityMatrix(matrix);
}

const std::vector<GalleryEntry>& gallery_entries() {
  static const std::vector<GalleryEntry> entries = {
      {"funderlic8", ChainKind::Dtmc, "8-state mammillary compartment chain", {}},
      {"meyer4", ChainKind::Dtmc, "4-state chain with a known group inverse", {}},
      {"hessenberg-gi-m-1", ChainKind::Dtmc,
       "lower-Hessenberg chain of the embedded GI/M/1 queue with negative arrivals, a_k geometric",
       {{"N", kDefaultTruncation}, {"a_sum", 0.6}, {"ratio", 0.5}}},
      {"odd-even-p", ChainKind::Dtmc, "odd states fall to 0, even states to 1, up-step q = 1 - p",
       {{"N", kDefaultTruncation}, {"p", 0.5}}},
      {"odd-even-p-periodic", ChainKind::Dtmc, "odd-even chain with P(0,1) = 1, period 2",
       {{"N", kDefaultTruncation}, {"p", 0.5}, {"lambda", 1e-6}}},
      {"birth-death", ChainKind::Dtmc, "birth-death chain on 0..n, down a, up b, holding 1 - a - b",
       {{"n", 20}, {"a", 0.3}, {"b", 0.4}}},
      {"geometric-return", ChainKind::Dtmc, "0 -> 1, then return to 0 w.p. p or move up",
       {{"N", kDefaultTruncation}, {"p", 0.5}}},
      {"mm1", ChainKind::Ctmc, "M/M/1 queue, arrival sigma, service mu, V(i) = (mu/sigma)^(i/2)",
       {{"N", kDefaultTruncation}, {"sigma", 1.0}, {"mu", 4.0}}},
      {"batch-arrival", ChainKind::Ctmc, "queue with batches of one or two arrivals, V(i) = z0^i",
       {{"N", kDefaultTruncation}, {"mu", 3.0}, {"lambda1", 0.6}, {"lambda2", 0.3}}},
      {"two-state-ctmc", ChainKind::Ctmc, "two states, rates a (0 -> 1) and b (1 -> 0)", {{"a", 1.0}, {"b", 2.0}}},
  };
  return entries;
}

std::vector<std::string> gallery_names() {
  std::vector<std::string> names;
  for (const auto& entry : gallery_entries()) names.push_back(entry.name);
  return names;
}

GalleryModel make_gallery_model(const std::string& name, const GalleryParams& overrides) {
  const GalleryEntry& entry = find_entry(name);
  GalleryModel model;
  model.name = entry.name;
  model.kind = entry.kind;
  model.note = entry.summary;
  model.params = merge(entry, overrides);
  if (model.params.count("N")) model.truncation = state_count(model.params, "N", 1);

  if (name == "funderlic8") {
    model.matrix = funderlic8();
  } else if (name == "meyer4") {
    model.matrix = meyer4();
  } else if (name == "hessenberg-gi-m-1") {
    model = hessenberg(std::move(model));
  } else if (name == "odd-even-p") {
    model = odd_even(std::move(model), false);
  } else if (name == "odd-even-p-periodic") {
    model = odd_even(std::move(model), true);
  } else if (name == "birth-death") {
    model = birth_death(std::move(model));
  } else if (name == "geometric-return") {
    model = geometric_return(std::move(model));
  } else if (name == "mm1") {
    model = mm1(std::move(model));
  } else if (name == "batch-arrival") {
    model = batch_arrival(std::move(model));
  } else {
    model = two_state(std::move(model));
  }

  if (model.kind == ChainKind::Dtmc) {
    const StochasticMatrix p = model.dtmc();
    if (model.d1) validate_drift_d1(p, *model.d1);
  } else {
    (void)model.ctmc();
  }
  return model;
}

}  // namespace mcpert
