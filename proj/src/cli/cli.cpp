#include "mcpert/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mcpert/chain_file.hpp"
#include "mcpert/ctmc_bounds.hpp"
#include "mcpert/dtmc_bounds.hpp"
#include "mcpert/errors.hpp"
#include "mcpert/gallery.hpp"
#include "mcpert/norms.hpp"
#include "mcpert/solvers.hpp"
#include "mcpert/verify.hpp"

namespace mcpert {

namespace {

using json = nlohmann::ordered_json;

enum class Format { Table, Json };

std::string sig6(double x) {
  std::ostringstream s;
  s << std::setprecision(6) << x;
  return s.str();
}

std::string sig6(const std::optional<double>& x) { return x ? sig6(*x) : "-"; }

json number_or_null(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

// Fixed-width text table; every column is padded to its widest cell.
class Table {
 public:
  explicit Table(std::vector<std::string> header) : rows_{std::move(header)} {}
  void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

  void print(std::ostream& out, const std::string& indent = "") const {
    std::vector<std::size_t> width(rows_.front().size(), 0);
    for (const auto& row : rows_) {
      for (std::size_t k = 0; k < row.size(); ++k) width[k] = std::max(width[k], row[k].size());
    }
    for (const auto& row : rows_) {
      std::string line = indent;
      for (std::size_t k = 0; k < row.size(); ++k) {
        line += row[k];
        if (k + 1 < row.size()) line += std::string(width[k] - row[k].size() + 2, ' ');
      }
      out << line << '\n';
    }
  }

 private:
  std::vector<std::vector<std::string>> rows_;
};

GalleryParams parse_params(const std::vector<std::string>& items) {
  GalleryParams params;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw Error(ErrorKind::InvalidParameters, "--param expects key=value, got '" + item + "'");
    }
    try {
      std::size_t used = 0;
      const std::string text = item.substr(eq + 1);
      const double value = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      params[item.substr(0, eq)] = value;
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::InvalidParameters, "--param value is not a number in '" + item + "'");
    }
  }
  return params;
}

GalleryModel build_model(const std::string& name, GalleryParams params, std::optional<int> truncation) {
  if (truncation) {
    const auto& entries = gallery_entries();
    const auto it = std::find_if(entries.begin(), entries.end(), [&](const auto& e) { return e.name == name; });
    if (it != entries.end() && it->defaults.count("N") == 0) {
      throw Error(ErrorKind::InvalidParameters, "model '" + name + "' is finite; --truncation does not apply");
    }
    params["N"] = *truncation;
  }
  return make_gallery_model(name, params);
}

std::string chain_summary(ChainKind kind, const Matrix& m) {
  std::ostringstream s;
  s << to_string(kind) << ", ";
  if (kind == ChainKind::Dtmc) {
    const StochasticMatrix p(m);
    s << (p.irreducible() ? "irreducible" : "reducible") << ", ";
    if (p.aperiodic()) {
      s << "aperiodic";
    } else {
      s << "period " << p.period();
    }
  } else {
    const IntensityMatrix q(m);
    s << (q.irreducible() ? "irreducible" : "reducible") << ", uniformization constant "
      << sig6(q.uniformization_constant());
  }
  s << ", n=" << m.rows();
  return s.str();
}

// ---------------------------------------------------------------- validate

int cmd_validate(const std::string& path, Format format, std::ostream& out) {
  const ChainFile file = read_chain_file(path);
  bool irreducible = false;
  json report = json::object();
  report["kind"] = std::string(to_string(file.kind));
  report["states"] = file.states;
  if (file.kind == ChainKind::Dtmc) {
    const StochasticMatrix p(file.matrix);
    irreducible = p.irreducible();
    report["irreducible"] = irreducible;
    report["period"] = p.period();
  } else {
    const IntensityMatrix q(file.matrix);
    irreducible = q.irreducible();
    report["irreducible"] = irreducible;
    report["uniformization_constant"] = q.uniformization_constant();
  }
  std::optional<double> delta_norm;
  if (file.perturbed_matrix) {
    delta_norm = matrix_norm(*file.perturbed_matrix - file.matrix);
    report["perturbed"] = chain_summary(file.kind, *file.perturbed_matrix);
    report["delta_norm"] = *delta_norm;
  }
  if (format == Format::Json) {
    out << report.dump(2) << '\n';
  } else {
    out << chain_summary(file.kind, file.matrix) << '\n';
    if (file.perturbed_matrix) {
      out << "perturbed: " << chain_summary(file.kind, *file.perturbed_matrix) << ", ||Delta|| = " << sig6(*delta_norm)
          << '\n';
    }
  }
  return irreducible ? kExitOk : kExitHypothesisWarning;
}

// ------------------------------------------------------------------ bounds

struct BoundsOptions {
  int m_max = 1;
  bool v_norm = false;
  std::string drift_file;
  Index target = 0;
  Format format = Format::Table;
};

struct DriftFile {
  Index taboo_state = 0;
  Vector v;
};

DriftFile read_drift_file(const std::string& path, Index n, Index default_taboo) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open '" + path + "'");
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ParseError, path + ": malformed JSON at byte " + std::to_string(e.byte));
  }
  DriftFile drift;
  drift.taboo_state = default_taboo;
  const json* values = &root;
  if (root.is_object()) {
    if (!root.contains("v")) throw Error(ErrorKind::ParseError, path + ": missing field 'v'");
    values = &root.at("v");
    if (root.contains("taboo_state")) {
      if (!root.at("taboo_state").is_number_integer()) {
        throw Error(ErrorKind::ParseError, path + ": field 'taboo_state': expected an integer");
      }
      drift.taboo_state = root.at("taboo_state").get<Index>();
    }
  }
  if (!values->is_array() || static_cast<Index>(values->size()) != n) {
    throw Error(ErrorKind::ParseError, path + ": field 'v': expected an array of " + std::to_string(n) + " numbers");
  }
  drift.v.resize(n);
  for (Index i = 0; i < n; ++i) {
    const json& x = (*values)[static_cast<std::size_t>(i)];
    if (!x.is_number()) {
      throw Error(ErrorKind::ParseError, path + ": field 'v[" + std::to_string(i) + "]': expected a number");
    }
    drift.v(i) = x.get<double>();
  }
  if (drift.taboo_state < 0 || drift.taboo_state >= n) {
    throw Error(ErrorKind::ParseError, path + ": field 'taboo_state': out of range");
  }
  return drift;
}

struct BoundRow {
  BoundReport report;
  std::optional<std::string> failure;

  std::string status() const {
    if (failure || !report.hypotheses_hold()) return "hypothesis failed";
    if (report.valid && !*report.valid) return "VIOLATED";
    return "ok";
  }
};

template <class F>
BoundRow attempt(const std::string& name, BoundNorm norm, F&& compute) {
  try {
    return {compute(), std::nullopt};
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ParseError || e.kind() == ErrorKind::ValidationError) throw;
    BoundRow row;
    row.report.bound_name = name;
    row.report.norm = norm;
    row.failure = e.what();
    return row;
  }
}

// Fills in value, exact gap and validity for a supplied perturbation, or
// drops the value when there is none.
void finish(BoundRow& row, const std::optional<double>& gap) {
  if (row.failure || !row.report.hypotheses_hold()) return;
  if (!gap) {
    row.report.value.reset();
    return;
  }
  if (row.report.value) attach_exact_gap(row.report, gap.value_or(0.0));
}

BoundRow best_skeleton(const StochasticMatrix& p, const StochasticMatrix& p_tilde, int m_max) {
  std::optional<BoundRow> best;
  std::string last_failure;
  for (int m = 1; m <= m_max; ++m) {
    BoundRow row = attempt("skeleton", BoundNorm::TotalVariation, [&] { return skeleton_bound(p, p_tilde, m); });
    if (row.failure) {
      last_failure = *row.failure;
      continue;
    }
    if (!best || *row.report.ell < *best->report.ell) best = std::move(row);
  }
  if (best) return *best;
  BoundRow row;
  row.report.bound_name = "skeleton";
  row.failure = last_failure;
  return row;
}

std::vector<BoundRow> dtmc_rows(const ChainFile& file, const BoundsOptions& options,
                                const std::optional<DriftFile>& drift, std::optional<WeightFunction> weight) {
  const StochasticMatrix p(file.matrix);
  std::optional<DtmcPair> pair;
  if (file.perturbed_matrix) pair.emplace(p, StochasticMatrix(*file.perturbed_matrix));
  const std::optional<double> delta_norm = pair ? std::optional<double>(matrix_norm(pair->delta)) : std::nullopt;
  std::optional<double> gap;
  if (pair) gap = exact_gap(*pair);
  const StochasticMatrix& p_tilde = pair ? pair->perturbed : p;
  constexpr auto tv = BoundNorm::TotalVariation;

  std::vector<BoundRow> rows;
  rows.push_back(attempt("seneta", tv, [&] { return seneta_bound(p, delta_norm.value_or(0.0)); }));
  rows.push_back(attempt("seneta_best", tv, [&] {
    return seneta_best_bound(p, stationary_distribution(p), delta_norm);
  }));
  rows.push_back(best_skeleton(p, p_tilde, options.m_max));
  rows.push_back(attempt("small_set", tv, [&] {
    return small_set_bound(p, {1, options.m_max}, pair ? std::optional<StochasticMatrix>(p_tilde) : std::nullopt).first;
  }));
  if (drift) {
    rows.push_back(attempt("drift_d1", tv, [&] {
      return drift_bound_d1(p, DriftCertificateD1{drift->taboo_state, drift->v, drift->v.maxCoeff()}, delta_norm);
    }));
  }
  rows.push_back(attempt("drift_hitting", tv, [&] { return drift_bound_hitting(p, delta_norm); }));
  for (auto& row : rows) finish(row, gap);

  if (options.v_norm) {
    const Index taboo = drift ? drift->taboo_state : options.target;
    const double dv = pair ? v_norm_matrix(pair->delta, *weight) : 0.0;
    std::optional<double> v_gap;
    if (pair) v_gap = exact_gap(*pair, weight);
    std::optional<DriftCertificateD2> cert;
    const BoundRow fit = attempt("v_bound_i", BoundNorm::Weighted, [&] {
      cert = fit_drift_d2(p, *weight, taboo);
      return BoundReport{};
    });
    for (const char* name : {"v_bound_i", "v_bound_ii"}) {
      BoundRow row = fit;
      row.report.bound_name = name;
      if (cert) {
        row = attempt(name, BoundNorm::Weighted, [&] {
          return std::string(name) == "v_bound_i" ? v_bound_i(p, *cert, stationary_distribution(p), dv)
                                                  : v_bound_ii(*cert, dv);
        });
      }
      finish(row, v_gap);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<BoundRow> ctmc_rows(const ChainFile& file, const BoundsOptions& options,
                                const std::optional<DriftFile>& drift, std::optional<WeightFunction> weight) {
  const IntensityMatrix q(file.matrix);
  std::optional<CtmcPair> pair;
  if (file.perturbed_matrix) pair.emplace(q, IntensityMatrix(*file.perturbed_matrix));
  const std::optional<double> delta_norm = pair ? std::optional<double>(matrix_norm(pair->delta)) : std::nullopt;
  std::optional<double> gap;
  if (pair) gap = exact_gap(*pair);
  constexpr auto tv = BoundNorm::TotalVariation;

  std::vector<BoundRow> rows;
  rows.push_back(attempt("ctmc_deviation", tv, [&] { return ctmc_deviation_bound(q, delta_norm); }));
  rows.push_back(attempt("ctmc_lambda1", tv, [&] { return ctmc_lambda1_bound(q, delta_norm); }));
  rows.push_back(attempt("ctmc_small_set", tv, [&] { return ctmc_small_set_bound(q, delta_norm); }));
  if (drift) {
    rows.push_back(attempt("ctmc_drift_d1", tv, [&] {
      return ctmc_drift_bound_d1(q, drift->v, drift->taboo_state, delta_norm);
    }));
  }
  rows.push_back(attempt("ctmc_drift_hitting", tv, [&] { return ctmc_drift_bound_hitting(q, delta_norm); }));
  for (auto& row : rows) finish(row, gap);

  if (options.v_norm) {
    const Index taboo = drift ? drift->taboo_state : options.target;
    const double dv = pair ? v_norm_matrix(pair->delta, *weight) : 0.0;
    std::optional<double> v_gap;
    if (pair) v_gap = exact_gap(*pair, weight);
    std::vector<BoundRow> v_rows;
    try {
      const CtmcDriftD2Prime cert = fit_ctmc_drift_d2(q, *weight, taboo);
      for (auto& report : ctmc_v_bounds(q, cert, std::nullopt, dv)) v_rows.push_back({std::move(report), std::nullopt});
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::ParseError || e.kind() == ErrorKind::ValidationError) throw;
      for (const char* name : {"ctmc_v_bound_i", "ctmc_v_bound_ii"}) {
        BoundRow row;
        row.report.bound_name = name;
        row.report.norm = BoundNorm::Weighted;
        row.failure = e.what();
        v_rows.push_back(std::move(row));
      }
    }
    for (auto& row : v_rows) {
      finish(row, v_gap);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string hypothesis_text(const BoundRow& row) {
  if (row.failure) return *row.failure;
  std::string text;
  for (const auto& h : row.report.hypotheses) {
    if (!text.empty()) text += "; ";
    text += h.name + (h.holds ? "" : " FAILS") + (h.detail.empty() ? "" : " (" + h.detail + ")");
  }
  return text;
}

json row_json(const BoundRow& row) {
  json j = json::object();
  j["bound"] = row.report.bound_name;
  j["norm"] = row.report.norm == BoundNorm::Weighted ? "weighted" : "total_variation";
  j["status"] = row.status();
  if (row.failure) j["failure"] = *row.failure;
  json hyps = json::array();
  for (const auto& h : row.report.hypotheses) hyps.push_back({{"name", h.name}, {"holds", h.holds}, {"detail", h.detail}});
  j["hypotheses"] = hyps;
  j["ell"] = number_or_null(row.report.ell);
  j["value"] = number_or_null(row.report.value);
  j["exact_gap"] = number_or_null(row.report.exact_gap);
  j["valid"] = row.report.valid ? json(*row.report.valid) : json(nullptr);
  json details = json::object();
  for (const auto& [key, value] : row.report.details) details[key] = value;
  j["details"] = details;
  return j;
}

int cmd_bounds(const std::string& path, const BoundsOptions& options, std::ostream& out) {
  if (options.m_max < 1) throw Error(ErrorKind::InvalidParameters, "--m-max must be at least 1");
  const ChainFile file = read_chain_file(path);
  if (options.target < 0 || options.target >= file.states) {
    throw Error(ErrorKind::InvalidParameters, "--target out of range");
  }
  std::optional<DriftFile> drift;
  if (!options.drift_file.empty()) drift = read_drift_file(options.drift_file, file.states, options.target);
  std::optional<WeightFunction> weight;
  if (options.v_norm) {
    if (file.weight_function) {
      weight.emplace(*file.weight_function);
    } else if (drift) {
      weight.emplace(drift->v);
    } else {
      throw Error(ErrorKind::InvalidParameters, "--v-norm needs a weight_function in the chain file or --drift-file");
    }
  }
  const std::vector<BoundRow> rows = file.kind == ChainKind::Dtmc ? dtmc_rows(file, options, drift, weight)
                                                                  : ctmc_rows(file, options, drift, weight);
  bool warning = false;
  bool violation = false;
  for (const auto& row : rows) {
    const std::string status = row.status();
    warning = warning || status == "hypothesis failed";
    violation = violation || status == "VIOLATED";
  }

  if (options.format == Format::Json) {
    json report = json::object();
    report["kind"] = std::string(to_string(file.kind));
    report["states"] = file.states;
    if (file.perturbed_matrix) report["delta_norm"] = matrix_norm(*file.perturbed_matrix - file.matrix);
    json list = json::array();
    for (const auto& row : rows) list.push_back(row_json(row));
    report["bounds"] = list;
    out << report.dump(2) << '\n';
  } else {
    out << chain_summary(file.kind, file.matrix) << '\n';
    if (file.perturbed_matrix) out << "||Delta|| = " << sig6(matrix_norm(*file.perturbed_matrix - file.matrix)) << '\n';
    Table table({"bound", "norm", "status", "ell", "value", "exact_gap", "details"});
    for (const auto& row : rows) {
      std::string details;
      for (const auto& [key, value] : row.report.details) details += (details.empty() ? "" : " ") + key + "=" + sig6(value);
      table.add({row.report.bound_name, row.report.norm == BoundNorm::Weighted ? "V" : "TV", row.status(),
                 sig6(row.report.ell), sig6(row.report.value), sig6(row.report.exact_gap), details});
    }
    table.print(out);
    for (const auto& row : rows) out << "  " << row.report.bound_name << ": " << hypothesis_text(row) << '\n';
  }
  if (violation) return kExitViolation;
  return warning ? kExitHypothesisWarning : kExitOk;
}

// ----------------------------------------------------------------- hitting

bool tridiagonal(const Matrix& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (std::abs(i - j) > 1 && m(i, j) != 0.0) return false;
    }
  }
  return true;
}

std::optional<Vector> closed_form_hitting(const Matrix& p, Index target) {
  if (p.rows() < 2 || !tridiagonal(p)) return std::nullopt;
  const Index n = p.rows();
  Vector a = Vector::Zero(n), b = Vector::Zero(n), c = p.diagonal();
  for (Index i = 1; i < n; ++i) a(i) = p(i, i - 1);
  for (Index i = 0; i + 1 < n; ++i) b(i) = p(i, i + 1);
  try {
    return birth_death_hitting_times(a, b, c, target);
  } catch (const Error&) {
    return std::nullopt;
  }
}

int cmd_hitting(const std::string& path, Index target, Format format, std::ostream& out) {
  const ChainFile file = read_chain_file(path);
  if (target < 0 || target >= file.states) throw Error(ErrorKind::InvalidParameters, "--target out of range");
  Vector m;
  std::optional<Vector> closed;
  if (file.kind == ChainKind::Dtmc) {
    const StochasticMatrix p(file.matrix);
    m = hitting_times(p, target);
    closed = closed_form_hitting(p.matrix(), target);
  } else {
    // A jump chain step of the h-approximation lasts h on average.
    const IntensityMatrix q(file.matrix);
    m = ctmc_hitting_times(q, target);
    const UniformizedChain u = uniformize(q);
    closed = closed_form_hitting(u.p_h.matrix(), target);
    if (closed) *closed *= u.h;
  }
  if (format == Format::Json) {
    json report = json::object();
    report["kind"] = std::string(to_string(file.kind));
    report["target"] = target;
    report["hitting_times"] = std::vector<double>(m.data(), m.data() + m.size());
    if (closed) report["closed_form"] = std::vector<double>(closed->data(), closed->data() + closed->size());
    out << report.dump(2) << '\n';
    return kExitOk;
  }
  std::vector<std::string> header{"state"};
  if (!file.labels.empty()) header.push_back("label");
  header.push_back("m");
  if (closed) header.push_back("closed_form");
  Table table(header);
  for (Index i = 0; i < m.size(); ++i) {
    std::vector<std::string> row{std::to_string(i)};
    if (!file.labels.empty()) row.push_back(file.labels[static_cast<std::size_t>(i)]);
    row.push_back(sig6(m(i)));
    if (closed) row.push_back(sig6((*closed)(i)));
    table.add(row);
  }
  out << "mean hitting times of state " << target << '\n';
  table.print(out);
  if (closed) out << "max |m - closed_form| = " << sig6((m - *closed).cwiseAbs().maxCoeff()) << '\n';
  return kExitOk;
}

// ------------------------------------------------------------------ verify

struct VerifyOptions {
  int cases = 1000;
  std::uint64_t seed = 1;
  double magnitude = 0.01;
  std::optional<int> truncation;
  std::vector<std::string> params;
  bool all = false;
  Format format = Format::Table;
};

struct ModelVerdict {
  json report;
  int violations = 0;
  int identity_failures = 0;
};

std::string norm_name(BoundNorm norm) { return norm == BoundNorm::Weighted ? "V" : "TV"; }

ModelVerdict verify_model(const GalleryModel& model, const VerifyOptions& options, Format format, std::ostream& out) {
  ModelVerdict verdict;
  const std::vector<IdentityResult> identities = identity_suite(model, options.magnitude, options.seed);
  std::optional<FuzzReport> fuzz;
  if (options.cases > 0) fuzz = fuzz_bounds(model, options.cases, options.magnitude, options.seed);

  json ids = json::array();
  for (const auto& r : identities) {
    if (!r.passed) ++verdict.identity_failures;
    ids.push_back({{"identity", r.identity},
                   {"taboo_state", r.taboo_state ? json(*r.taboo_state) : json(nullptr)},
                   {"residual", number_or_null(r.residual)},
                   {"passed", r.passed},
                   {"note", r.note}});
  }
  verdict.report["model"] = model.name;
  verdict.report["kind"] = std::string(to_string(model.kind));
  verdict.report["states"] = model.matrix.rows();
  verdict.report["identities"] = ids;
  if (fuzz) {
    verdict.violations = fuzz->violations;
    json summary = json::array();
    for (const auto& s : fuzz->summary) {
      summary.push_back({{"bound", s.bound_name},
                         {"norm", norm_name(s.norm)},
                         {"evaluated", s.evaluated},
                         {"hypothesis_failures", s.hypothesis_failures},
                         {"violations", s.violations},
                         {"useless", s.useless},
                         {"mean_tightness", s.mean_tightness},
                         {"max_tightness", s.max_tightness}});
    }
    verdict.report["fuzz"] = {{"cases", options.cases},
                              {"seed", options.seed},
                              {"magnitude", options.magnitude},
                              {"summary", summary},
                              {"violations", fuzz->violations}};
  }
  if (format == Format::Json) return verdict;

  out << "model " << model.name << " (" << to_string(model.kind) << ", n=" << model.matrix.rows() << ")\n";
  Table id_table({"identity", "state", "residual", "result", "note"});
  for (const auto& r : identities) {
    id_table.add({r.identity, r.taboo_state ? std::to_string(*r.taboo_state) : "-", sig6(r.residual),
                  r.note.rfind("skipped", 0) == 0 ? "skipped" : (r.passed ? "pass" : "FAIL"), r.note});
  }
  id_table.print(out, "  ");
  if (fuzz) {
    out << "  fuzz: " << options.cases << " cases, magnitude " << sig6(options.magnitude) << ", seed " << options.seed
        << '\n';
    Table fuzz_table({"bound", "norm", "evaluated", "hyp_failed", "violations", "useless", "mean_tight", "max_tight"});
    for (const auto& s : fuzz->summary) {
      fuzz_table.add({s.bound_name, norm_name(s.norm), std::to_string(s.evaluated), std::to_string(s.hypothesis_failures),
                      std::to_string(s.violations), std::to_string(s.useless), sig6(s.mean_tightness),
                      sig6(s.max_tightness)});
    }
    fuzz_table.print(out, "  ");
  }
  out << "  violations: " << verdict.violations << ", identity failures: " << verdict.identity_failures << '\n';
  return verdict;
}

int cmd_verify(const std::string& target, const VerifyOptions& options, std::ostream& out) {
  if (options.cases < 0) throw Error(ErrorKind::InvalidParameters, "--cases must be nonnegative");
  if (!(options.magnitude > 0.0)) throw Error(ErrorKind::InvalidParameters, "--magnitude must be positive");
  const GalleryParams params = parse_params(options.params);
  std::vector<GalleryModel> models;
  if (target == "gallery") {
    if (!options.all) throw Error(ErrorKind::InvalidParameters, "use 'verify gallery --all' to run every gallery model");
    if (!params.empty()) throw Error(ErrorKind::InvalidParameters, "--param applies to a single model");
    for (const auto& entry : gallery_entries()) {
      const bool infinite = entry.defaults.count("N") > 0;
      models.push_back(build_model(entry.name, {}, infinite ? options.truncation : std::nullopt));
    }
  } else if (std::filesystem::is_regular_file(target)) {
    const ChainFile file = read_chain_file(target);
    const std::string name = file.model.empty() ? std::filesystem::path(target).stem().string() : file.model;
    models.push_back(model_from_chain_file(file, name));
  } else {
    models.push_back(build_model(target, params, options.truncation));
  }

  int violations = 0;
  int identity_failures = 0;
  json list = json::array();
  for (const auto& model : models) {
    ModelVerdict verdict = verify_model(model, options, options.format, out);
    violations += verdict.violations;
    identity_failures += verdict.identity_failures;
    list.push_back(std::move(verdict.report));
  }
  if (options.format == Format::Json) {
    json report = json::object();
    report["models"] = list;
    report["violations"] = violations;
    report["identity_failures"] = identity_failures;
    out << report.dump(2) << '\n';
  } else {
    out << "summary: " << models.size() << (models.size() == 1 ? " model" : " models") << ", " << violations
        << " violations, " << identity_failures << " identity failures\n";
  }
  return violations > 0 || identity_failures > 0 ? kExitViolation : kExitOk;
}

// ----------------------------------------------------------------- gallery

int cmd_gallery_list(Format format, std::ostream& out) {
  if (format == Format::Json) {
    json list = json::array();
    for (const auto& e : gallery_entries()) {
      json defaults = json::object();
      for (const auto& [key, value] : e.defaults) defaults[key] = value;
      list.push_back({{"name", e.name}, {"kind", std::string(to_string(e.kind))}, {"params", defaults},
                      {"summary", e.summary}});
    }
    out << list.dump(2) << '\n';
    return kExitOk;
  }
  Table table({"name", "kind", "params", "summary"});
  for (const auto& e : gallery_entries()) {
    std::string params;
    for (const auto& [key, value] : e.defaults) params += (params.empty() ? "" : " ") + key + "=" + sig6(value);
    table.add({e.name, std::string(to_string(e.kind)), params.empty() ? "-" : params, e.summary});
  }
  table.print(out);
  return kExitOk;
}

struct ExportOptions {
  std::optional<int> truncation;
  std::vector<std::string> params;
  std::optional<double> magnitude;
  std::uint64_t seed = 1;
};

int cmd_gallery_export(const std::string& name, const std::string& path, const ExportOptions& options,
                       std::ostream& out) {
  const GalleryModel model = build_model(name, parse_params(options.params), options.truncation);
  ChainFile file = chain_file_from_model(model);
  if (options.magnitude) {
    if (!(*options.magnitude > 0.0)) throw Error(ErrorKind::InvalidParameters, "--magnitude must be positive");
    file.perturbed_matrix = model.matrix + fuzz_perturbation(model, *options.magnitude, options.seed, 0);
  }
  write_chain_file(file, path);
  out << "wrote " << path << " (" << to_string(model.kind) << ", n=" << model.matrix.rows() << ")\n";
  return kExitOk;
}

Format parse_format(const std::string& text) { return text == "json" ? Format::Json : Format::Table; }

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Perturbation bounds for stationary distributions of finite Markov chains", "mcpert"};
  app.require_subcommand(1);
  std::string format_text = "table";
  const auto add_format = [&](CLI::App* cmd) {
    cmd->add_option("--format", format_text, "Output format")->check(CLI::IsMember({"table", "json"}));
  };

  std::string path;
  auto* validate = app.add_subcommand("validate", "Check a chain file and summarize the chain");
  validate->add_option("path", path, "Chain file")->required();
  add_format(validate);

  BoundsOptions bounds_options;
  int target = 0;
  auto* bounds = app.add_subcommand("bounds", "Evaluate every applicable perturbation bound");
  bounds->add_option("path", path, "Chain file")->required();
  bounds->add_option("--m-max", bounds_options.m_max, "Largest power scanned by the skeleton and small-set bounds");
  bounds->add_flag("--v-norm", bounds_options.v_norm, "Add the V-norm bounds");
  bounds->add_option("--drift-file", bounds_options.drift_file, "JSON drift function {taboo_state, v} or array");
  bounds->add_option("--target", target, "Taboo state for drift fits");
  add_format(bounds);

  auto* hitting = app.add_subcommand("hitting", "Mean hitting times of a target state");
  hitting->add_option("path", path, "Chain file")->required();
  hitting->add_option("--target", target, "Target state");
  add_format(hitting);

  VerifyOptions verify_options;
  std::string verify_target;
  auto* verify = app.add_subcommand("verify", "Identity checks and bound fuzzing");
  verify->add_option("target", verify_target, "Chain file, gallery model name, or 'gallery' with --all")->required();
  verify->add_flag("--all", verify_options.all, "With target 'gallery': every gallery model");
  verify->add_option("--cases", verify_options.cases, "Fuzz cases per model");
  verify->add_option("--seed", verify_options.seed, "Fuzz seed");
  verify->add_option("--magnitude", verify_options.magnitude, "||Delta|| of each perturbation");
  verify->add_option("--truncation", verify_options.truncation, "Truncation level of infinite models");
  verify->add_option("--param", verify_options.params, "Model parameter override key=value");
  add_format(verify);

  auto* gallery = app.add_subcommand("gallery", "Built-in models");
  gallery->require_subcommand(1);
  auto* list = gallery->add_subcommand("list", "List the models and their parameters");
  add_format(list);
  ExportOptions export_options;
  std::string export_name;
  auto* exporter = gallery->add_subcommand("export", "Write a model as a chain file");
  exporter->add_option("name", export_name, "Model name")->required();
  exporter->add_option("path", path, "Output file")->required();
  exporter->add_option("--truncation", export_options.truncation, "Truncation level of infinite models");
  exporter->add_option("--param", export_options.params, "Model parameter override key=value");
  exporter->add_option("--magnitude", export_options.magnitude, "Also write a perturbed_matrix of this ||Delta||");
  exporter->add_option("--seed", export_options.seed, "Seed of the perturbation");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalidInput;
  }

  try {
    const Format format = parse_format(format_text);
    if (*validate) return cmd_validate(path, format, out);
    if (*bounds) {
      bounds_options.target = target;
      bounds_options.format = format;
      return cmd_bounds(path, bounds_options, out);
    }
    if (*hitting) return cmd_hitting(path, target, format, out);
    if (*verify) {
      verify_options.format = format;
      return cmd_verify(verify_target, verify_options, out);
    }
    if (*list) return cmd_gallery_list(format, out);
    return cmd_gallery_export(export_name, path, export_options, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalidInput;
  }
}

}  // namespace mcpert
