#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mcpert/chain.hpp"
#include "mcpert/gallery.hpp"

namespace mcpert {

/// On-disk chain description (JSON object):
///   kind: "dtmc" | "ctmc", states: n, matrix: n rows of n numbers,
///   optional labels, weight_function, perturbed_matrix,
///   and informational model / params entries written by gallery export.
struct ChainFile {
  ChainKind kind = ChainKind::Dtmc;
  Index states = 0;
  Matrix matrix;
  std::vector<std::string> labels;
  std::optional<Vector> weight_function;
  std::optional<Matrix> perturbed_matrix;
  std::string model;
  GalleryParams params;
};

/// Parses and validates. Syntax errors and type errors raise ParseError with
/// the line (and column, or the offending field path); matrices that fail
/// stochastic or generator checks raise ValidationError naming the row.
ChainFile parse_chain_file(const std::string& text);
ChainFile read_chain_file(const std::string& path);

/// Pretty-printed JSON with full double precision.
std::string serialize_chain_file(const ChainFile& file);
void write_chain_file(const ChainFile& file, const std::string& path);

ChainFile chain_file_from_model(const GalleryModel& model);
GalleryModel model_from_chain_file(const ChainFile& file, const std::string& name);

}  // namespace mcpert
