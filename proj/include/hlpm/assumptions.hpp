#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hlpm/grid.hpp"
#include "hlpm/monotone_graph.hpp"

namespace hlpm {

struct CheckItem {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<CheckItem> items;
  DegeneracyClass degeneracy = Unclassified{};

  [[nodiscard]] bool passed() const;
  [[nodiscard]] const CheckItem* find(const std::string& name) const;
  [[nodiscard]] std::string summary() const;
};

// Standing assumptions on (beta, u0). `breakpoints` are the user-declared
// points e_k of the degenerate case; they are accepted, not verified.
[[nodiscard]] ValidationReport validate_assumptions(const MonotoneGraph& beta, const DensityField& u0,
                                                    const std::optional<std::vector<double>>& breakpoints = {},
                                                    const GraphCheckOptions& opt = {});

}  // namespace hlpm
