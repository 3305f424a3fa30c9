#pragma once

// Stability plot P = d^2 ln|V| / d(ln w)^2, peak detection and the
// second-order damping/phase-margin mapping.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "loopscope/sweep.hpp"

namespace loopscope::stability {

struct StabilityCurve {
  std::string node;
  std::vector<double> log_freq;  // ln(w) at interior grid points
  std::vector<double> p;
  std::vector<std::uint8_t> clamped;  // stencil touched a floored magnitude
  double f_start = 0.0;               // grid bounds, Hz
  double f_stop = 0.0;

  std::size_t size() const { return p.size(); }
  double freq_hz(std::size_t i) const;
};

StabilityCurve stability_curve(const sweep::NodeResponse& resp);
StabilityCurve stability_curve(std::string node, const sweep::FrequencyGrid& grid, std::span<const double> magnitude,
                               std::span<const std::uint8_t> clamped = {});

enum class PeakKind { ComplexPole, ComplexZero };

enum PeakFlag : unsigned {
  kNoFlags = 0,
  kEndOfRange = 1u << 0,
  kPoleZeroDoublet = 1u << 1,
  kClampedData = 1u << 2,
  kSideLobe = 1u << 3,
};

enum class Severity { UnstableRisk, Marginal, Acceptable, Ungraded };

const char* kind_name(PeakKind k);
const char* severity_name(Severity s);
std::vector<std::string> flag_names(unsigned flags);
unsigned flag_from_name(std::string_view name);  // 0 when unknown

struct SeverityThresholds {
  double unstable_below = 0.3;
  double marginal_below = 0.5;
};

struct Peak {
  std::string node;
  PeakKind kind = PeakKind::ComplexPole;
  double natural_freq = 0.0;  // Hz
  double p_value = 0.0;
  std::optional<double> zeta;
  std::optional<double> phase_margin_deg;  // absent above the tabulated range
  std::optional<double> overshoot_pct;
  unsigned flags = kNoFlags;
  std::size_t index = 0;  // curve sample
  Severity severity = Severity::Ungraded;
  bool oscillatory = false;  // zeta < 1

  bool has(PeakFlag f) const { return (flags & f) != 0; }
  bool graded() const { return severity != Severity::Ungraded; }
  friend bool operator==(const Peak&, const Peak&) = default;
};

struct DetectOptions {
  double floor = 0.1;
  double doublet_gap = 0.05;      // relative frequency distance
  double side_lobe_ratio = 0.25;  // |lobe| <= ratio * |neighbour|
  SeverityThresholds thresholds;
};

std::vector<Peak> detect_peaks(const StabilityCurve& curve, const DetectOptions& options = {});

// Parabolic vertex through samples index-1, index, index+1.
std::pair<double, double> refine_peak(const StabilityCurve& curve, std::size_t index);

double zeta_from_index(double p_value);

struct Table1Row {
  double zeta;
  double overshoot_pct;
  std::optional<double> phase_margin_deg;
  std::optional<double> max_magnitude;
  double performance_index;
};

const std::array<Table1Row, 11>& table1();

struct Table1Estimate {
  std::optional<double> phase_margin_deg;
  double overshoot_pct = 0.0;
  Severity severity = Severity::Acceptable;
};

Table1Estimate table1_lookup(double zeta, const SeverityThresholds& thresholds = {});
Severity grade(double zeta, const SeverityThresholds& thresholds = {});

}  // namespace loopscope::stability
