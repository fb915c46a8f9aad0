#include "hlpm/assumptions.hpp"

#include <cmath>
#include <sstream>

#include "hlpm/mirror.hpp"

namespace hlpm {

bool ValidationReport::passed() const {
  for (const auto& i : items) {
    if (!i.passed) return false;
  }
  return true;
}

const CheckItem* ValidationReport::find(const std::string& name) const {
  for (const auto& i : items) {
    if (i.name == name) return &i;
  }
  return nullptr;
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& i : items) {
    os << (i.passed ? "[pass] " : "[FAIL] ") << i.name;
    if (!i.detail.empty()) os << ": " << i.detail;
    os << '\n';
  }
  return os.str();
}

ValidationReport validate_assumptions(const MonotoneGraph& beta, const DensityField& u0,
                                      const std::optional<std::vector<double>>& breakpoints,
                                      const GraphCheckOptions& opt) {
  ValidationReport r;
  {
    std::ostringstream os;
    const bool ok = u0.min() >= 0.0;
    if (!ok) os << "min u0 = " << u0.min();
    r.items.push_back({"non-negative", ok, os.str()});
  }
  {
    std::ostringstream os;
    os << "mass = " << u0.mass();
    r.items.push_back({"unit mass", std::abs(u0.mass() - 1.0) <= kUnitMassTolerance, os.str()});
  }
  {
    std::ostringstream os;
    os << "sup u0 = " << u0.max();
    r.items.push_back({"bounded", std::isfinite(u0.max()), os.str()});
  }
  {
    const Interval b0 = beta.eval(0.0);
    r.items.push_back({"beta(0) = 0", b0.contains(0.0, 1e-14), {}});
  }
  {
    const auto msg = beta.check_monotone(opt);
    r.items.push_back({"monotone", msg.empty(), msg});
  }
  {
    const auto msg = beta.check_growth(opt);
    r.items.push_back({"|beta(u)| <= c u", msg.empty(), msg});
  }

  r.degeneracy = classify(beta, opt);
  CheckItem a2{"assumption 2", false, describe(r.degeneracy)};
  if (std::holds_alternative<NonDegenerate>(r.degeneracy) ||
      std::holds_alternative<StrictlyIncreasingAfterZero>(r.degeneracy)) {
    a2.passed = true;
  } else if (std::holds_alternative<Degenerate>(r.degeneracy)) {
    a2.passed = breakpoints.has_value();
    a2.detail += a2.passed ? " with declared breakpoints e_k" : "; declare breakpoints e_k for the degenerate case";
  }
  r.items.push_back(std::move(a2));
  return r;
}

}  // namespace hlpm
