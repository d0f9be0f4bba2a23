#include "mcpert/chain_file.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mcpert/errors.hpp"

namespace mcpert {

namespace {

using json = nlohmann::ordered_json;

struct Location {
  std::size_t line = 1;
  std::size_t column = 1;
};

Location locate(const std::string& text, std::size_t offset) {
  Location loc;
  for (std::size_t i = 0; i < std::min(offset, text.size()); ++i) {
    if (text[i] == '\n') {
      ++loc.line;
      loc.column = 1;
    } else {
      ++loc.column;
    }
  }
  return loc;
}

// Line of the first occurrence of the key, or 0 when it is absent.
std::size_t key_line(const std::string& text, const std::string& key) {
  const auto at = text.find("\"" + key + "\"");
  return at == std::string::npos ? 0 : locate(text, at).line;
}

[[noreturn]] void field_error(const std::string& text, const std::string& key, const std::string& path,
                              const std::string& what) {
  std::ostringstream msg;
  const std::size_t line = key_line(text, key);
  if (line > 0) msg << "line " << line << ": ";
  msg << "field '" << path << "': " << what;
  throw Error(ErrorKind::ParseError, msg.str());
}

double number_at(const json& value, const std::string& text, const std::string& key, const std::string& path) {
  if (!value.is_number()) field_error(text, key, path, "expected a number");
  return value.get<double>();
}

Matrix matrix_field(const json& root, const std::string& text, const std::string& key, Index n) {
  const json& rows = root.at(key);
  if (!rows.is_array()) field_error(text, key, key, "expected an array of rows");
  if (static_cast<Index>(rows.size()) != n) {
    field_error(text, key, key, "has " + std::to_string(rows.size()) + " rows but states = " + std::to_string(n));
  }
  Matrix m(n, n);
  for (Index i = 0; i < n; ++i) {
    const json& row = rows[static_cast<std::size_t>(i)];
    const std::string row_path = key + "[" + std::to_string(i) + "]";
    if (!row.is_array()) field_error(text, key, row_path, "expected an array");
    if (static_cast<Index>(row.size()) != n) {
      field_error(text, key, row_path, "has " + std::to_string(row.size()) + " entries but states = " + std::to_string(n));
    }
    for (Index j = 0; j < n; ++j) {
      m(i, j) = number_at(row[static_cast<std::size_t>(j)], text, key, row_path + "[" + std::to_string(j) + "]");
    }
  }
  return m;
}

void validate_matrix(ChainKind kind, const Matrix& m) {
  if (kind == ChainKind::Dtmc) {
    (void)StochasticMatrix(m);
  } else {
    (void)IntensityMatrix(m);
  }
}

}  // namespace

ChainFile parse_chain_file(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const Location loc = locate(text, e.byte == 0 ? 0 : e.byte - 1);
    std::ostringstream msg;
    msg << "line " << loc.line << ", column " << loc.column << ": malformed JSON";
    throw Error(ErrorKind::ParseError, msg.str());
  }
  if (!root.is_object()) throw Error(ErrorKind::ParseError, "line 1: expected a JSON object");

  static const char* const known[] = {"kind",   "states", "matrix", "labels", "weight_function", "perturbed_matrix",
                                      "model", "params"};
  for (const auto& item : root.items()) {
    if (std::find(std::begin(known), std::end(known), item.key()) == std::end(known)) {
      field_error(text, item.key(), item.key(), "unknown field");
    }
  }
  for (const char* required : {"kind", "states", "matrix"}) {
    if (!root.contains(required)) throw Error(ErrorKind::ParseError, std::string("missing field '") + required + "'");
  }

  ChainFile file;
  const json& kind = root.at("kind");
  if (kind == "dtmc") {
    file.kind = ChainKind::Dtmc;
  } else if (kind == "ctmc") {
    file.kind = ChainKind::Ctmc;
  } else {
    field_error(text, "kind", "kind", "expected \"dtmc\" or \"ctmc\"");
  }
  const json& states = root.at("states");
  if (!states.is_number_integer() || states.get<long long>() < 1) {
    field_error(text, "states", "states", "expected a positive integer");
  }
  file.states = static_cast<Index>(states.get<long long>());
  file.matrix = matrix_field(root, text, "matrix", file.states);

  if (root.contains("labels")) {
    const json& labels = root.at("labels");
    if (!labels.is_array() || static_cast<Index>(labels.size()) != file.states) {
      field_error(text, "labels", "labels", "expected an array of " + std::to_string(file.states) + " strings");
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (!labels[i].is_string()) field_error(text, "labels", "labels[" + std::to_string(i) + "]", "expected a string");
      file.labels.push_back(labels[i].get<std::string>());
    }
  }
  if (root.contains("weight_function")) {
    const json& w = root.at("weight_function");
    if (!w.is_array() || static_cast<Index>(w.size()) != file.states) {
      field_error(text, "weight_function", "weight_function",
                  "expected an array of " + std::to_string(file.states) + " numbers");
    }
    Vector v(file.states);
    for (Index i = 0; i < file.states; ++i) {
      const std::string path = "weight_function[" + std::to_string(i) + "]";
      v(i) = number_at(w[static_cast<std::size_t>(i)], text, "weight_function", path);
      if (!(v(i) > 0.0)) field_error(text, "weight_function", path, "weights must be positive");
    }
    file.weight_function = std::move(v);
  }
  if (root.contains("perturbed_matrix")) {
    file.perturbed_matrix = matrix_field(root, text, "perturbed_matrix", file.states);
  }
  if (root.contains("model")) {
    if (!root.at("model").is_string()) field_error(text, "model", "model", "expected a string");
    file.model = root.at("model").get<std::string>();
  }
  if (root.contains("params")) {
    const json& params = root.at("params");
    if (!params.is_object()) field_error(text, "params", "params", "expected an object");
    for (const auto& item : params.items()) {
      file.params[item.key()] = number_at(item.value(), text, "params", "params." + item.key());
    }
  }

  validate_matrix(file.kind, file.matrix);
  if (file.perturbed_matrix) {
    try {
      validate_matrix(file.kind, *file.perturbed_matrix);
    } catch (const Error& e) {
      throw Error(e.kind(), std::string("perturbed_matrix: ") + e.what(), e.state());
    }
  }
  return file;
}

ChainFile read_chain_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_chain_file(buffer.str());
}

// One top-level field per line and one matrix row per line, so parse errors
// point somewhere useful.
std::string serialize_chain_file(const ChainFile& file) {
  auto row = [](const auto& values, Index n) {
    json out = json::array();
    for (Index j = 0; j < n; ++j) out.push_back(values(j));
    return out.dump();
  };
  auto rows = [&](const Matrix& m) {
    std::string out = "[\n";
    for (Index i = 0; i < m.rows(); ++i) {
      out += "  " + row(m.row(i), m.cols()) + (i + 1 < m.rows() ? ",\n" : "\n");
    }
    return out + " ]";
  };
  std::vector<std::pair<std::string, std::string>> fields;
  if (!file.model.empty()) fields.emplace_back("model", json(file.model).dump());
  if (!file.params.empty()) {
    json params = json::object();
    for (const auto& [key, value] : file.params) params[key] = value;
    fields.emplace_back("params", params.dump());
  }
  fields.emplace_back("kind", json(std::string(to_string(file.kind))).dump());
  fields.emplace_back("states", json(file.states).dump());
  fields.emplace_back("matrix", rows(file.matrix));
  if (!file.labels.empty()) fields.emplace_back("labels", json(file.labels).dump());
  if (file.weight_function) fields.emplace_back("weight_function", row(*file.weight_function, file.states));
  if (file.perturbed_matrix) fields.emplace_back("perturbed_matrix", rows(*file.perturbed_matrix));
  std::string out = "{\n";
  for (std::size_t k = 0; k < fields.size(); ++k) {
    out += " \"" + fields[k].first + "\": " + fields[k].second + (k + 1 < fields.size() ? ",\n" : "\n");
  }
  return out + "}\n";
}

void write_chain_file(const ChainFile& file, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::ParseError, "cannot write '" + path + "'");
  out << serialize_chain_file(file);
}

ChainFile chain_file_from_model(const GalleryModel& model) {
  ChainFile file;
  file.kind = model.kind;
  file.states = model.matrix.rows();
  file.matrix = model.matrix;
  if (model.weight) file.weight_function = model.weight->values();
  file.model = model.name;
  file.params = model.params;
  return file;
}

GalleryModel model_from_chain_file(const ChainFile& file, const std::string& name) {
  GalleryModel model;
  model.name = name;
  model.kind = file.kind;
  model.params = file.params;
  model.matrix = file.matrix;
  if (file.weight_function) model.weight = WeightFunction(*file.weight_function);
  return model;
}

}  // namespace mcpert
