#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mcpert/chain.hpp"
#include "mcpert/dtmc_bounds.hpp"

namespace mcpert {

enum class ChainKind { Dtmc, Ctmc };

std::string_view to_string(ChainKind kind);

/// Parameter overrides by name; unknown names are rejected.
using GalleryParams = std::map<std::string, double>;

/// A named model with its constructed matrix and any drift functions that
/// come with it. Infinite chains are cut to `truncation` states.
struct GalleryModel {
  std::string name;
  ChainKind kind = ChainKind::Dtmc;
  GalleryParams params;
  std::optional<int> truncation;
  std::string note;
  Matrix matrix;
  /// Weight function for V-norm bounds (taboo state 0).
  std::optional<WeightFunction> weight;
  /// Constructed D1 drift function, validated at build time.
  std::optional<DriftCertificateD1> d1;

  StochasticMatrix dtmc() const;
  IntensityMatrix ctmc() const;
};

struct GalleryEntry {
  std::string name;
  ChainKind kind;
  std::string summary;
  GalleryParams defaults;
};

const std::vector<GalleryEntry>& gallery_entries();
std::vector<std::string> gallery_names();

/// The constant-type drift function offered for the periodic odd-even chain:
/// V(0) = 0, V(1) = lambda/p, V(i) = (1 + lambda)/p for i >= 2. It is not a
/// D1 function: PV(1) = q (1 + lambda)/p exceeds V(1) - 1. Any D1 function
/// dominates the hitting times of 0, whose supremum is 2/p on the even states.
Vector odd_even_periodic_drift(int n, double p, double lambda);

/// Builds a model by name. Throws InvalidParameters for an unknown name or
/// parameter, or for parameter values outside the model's valid range.
GalleryModel make_gallery_model(const std::string& name, const GalleryParams& overrides = {});

}  // namespace mcpert
