#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "loopscope/stability.hpp"

namespace loopscope::report {

using stability::Peak;

struct LoopGroup {
  double label_freq = 0.0;  // Hz, natural frequency of the most negative member
  std::vector<Peak> members;  // descending |p_value|
  std::optional<double> worst_zeta;
  std::string worst_node;
  stability::Severity severity = stability::Severity::Ungraded;

  friend bool operator==(const LoopGroup&, const LoopGroup&) = default;
};

inline constexpr double kDefaultRelGap = 0.05;

// Single-linkage clustering of ComplexPole peaks on ln(natural_freq).
std::vector<LoopGroup> group_loops(std::vector<Peak> peaks, double rel_gap = kDefaultRelGap);

struct GridSummary {
  double f_start = 0.0;
  double f_stop = 0.0;
  int points_per_decade = 0;
  std::size_t points = 0;

  friend bool operator==(const GridSummary&, const GridSummary&) = default;
};

GridSummary summarize(const sweep::FrequencyGrid& grid);

struct StabilityReport {
  std::string netlist_title;
  GridSummary grid;
  double floor = 0.1;
  double rel_gap = kDefaultRelGap;
  std::vector<LoopGroup> groups;
  std::vector<Peak> zeros;
  std::vector<std::string> warnings;
  std::map<std::string, std::string> per_node_errors;
  std::optional<std::string> stamp;

  friend bool operator==(const StabilityReport&, const StabilityReport&) = default;
};

StabilityReport build_report(std::string title, const GridSummary& grid, const std::vector<Peak>& peaks,
                             double rel_gap = kDefaultRelGap);

// "3.16 MHz", "500 kHz", "50.0 Hz"
std::string engineering_hz(double hz);

std::string render_text(const StabilityReport& report);

std::string render_curves_csv(const std::vector<stability::StabilityCurve>& curves,
                              const std::vector<sweep::NodeResponse>& responses);

inline constexpr const char* kJsonSchema = "loopscope-report-1";

std::string render_json(const StabilityReport& report);
StabilityReport parse_json(const std::string& text);

}  // namespace loopscope::report
