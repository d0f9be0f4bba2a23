#include "mcpert/report.hpp"

#include <algorithm>

namespace mcpert {

bool BoundReport::hypotheses_hold() const {
  return std::all_of(hypotheses.begin(), hypotheses.end(), [](const Hypothesis& h) { return h.holds; });
}

std::optional<double> BoundReport::detail(const std::string& key) const {
  for (const auto& [name, value] : details) {
    if (name == key) return value;
  }
  return std::nullopt;
}

bool BoundReport::useless() const { return norm == BoundNorm::TotalVariation && value && *value >= 2.0; }

void attach_exact_gap(BoundReport& report, double exact_gap) {
  report.exact_gap = exact_gap;
  if (report.value) {
    report.valid = *report.value + kGapComparisonSlack * std::max(1.0, *report.value) >= exact_gap;
  }
}

}  // namespace mcpert
