#include <cmath>
#include <limits>

#include "loopscope/error.hpp"
#include "loopscope/stability.hpp"

namespace loopscope::stability {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Piecewise-linear in zeta over rows [first, last] of the table (descending zeta).
template <class Get>
double interpolate(double zeta, std::size_t first, std::size_t last, Get get) {
  const auto& t = table1();
  for (std::size_t i = first; i <= last; ++i)
    if (zeta == t[i].zeta) return get(t[i]);
  for (std::size_t i = first; i < last; ++i) {
    const auto& hi = t[i];
    const auto& lo = t[i + 1];
    if (zeta < hi.zeta && zeta > lo.zeta) {
      const double u = (zeta - lo.zeta) / (hi.zeta - lo.zeta);
      return get(lo) + u * (get(hi) - get(lo));
    }
  }
  return zeta > t[first].zeta ? get(t[first]) : get(t[last]);
}

}  // namespace

const std::array<Table1Row, 11>& table1() {
  static const std::array<Table1Row, 11> rows{{
      {1.0, 0.0, std::nullopt, std::nullopt, -1.0},
      {0.9, 0.0, std::nullopt, std::nullopt, -1.2},
      {0.8, 2.0, std::nullopt, std::nullopt, -1.6},
      {0.7, 5.0, 70.0, 1.01, -2.0},
      {0.6, 10.0, 60.0, 1.04, -2.8},
      {0.5, 16.0, 50.0, 1.15, -4.0},
      {0.4, 25.0, 40.0, 1.4, -6.3},
      {0.3, 37.0, 30.0, 1.8, -11.0},
      {0.2, 53.0, 20.0, 2.6, -25.0},
      {0.1, 73.0, 10.0, 5.0, -100.0},
      {0.0, 100.0, 0.0, kInf, -kInf},
  }};
  return rows;
}

double zeta_from_index(double p_value) {
  if (!(p_value < 0.0)) throw Error(Errc::NonNegativeIndex, "performance index must be negative");
  if (std::isinf(p_value)) return 0.0;
  return 1.0 / std::sqrt(-p_value);
}

Severity grade(double zeta, const SeverityThresholds& thresholds) {
  if (zeta < thresholds.unstable_below) return Severity::UnstableRisk;
  if (zeta < thresholds.marginal_below) return Severity::Marginal;
  return Severity::Acceptable;
}

Table1Estimate table1_lookup(double zeta, const SeverityThresholds& thresholds) {
  Table1Estimate e;
  e.severity = grade(zeta, thresholds);
  e.overshoot_pct = interpolate(zeta, 0, 10, [](const Table1Row& r) { return r.overshoot_pct; });
  if (zeta <= 0.7) e.phase_margin_deg = interpolate(zeta, 3, 10, [](const Table1Row& r) { return *r.phase_margin_deg; });
  return e;
}

}  // namespace loopscope::stability
