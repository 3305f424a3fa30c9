#pragma once

// Per-node AC current injection over a log-spaced frequency grid.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "loopscope/mna.hpp"
#include "loopscope/netlist.hpp"

namespace loopscope::sweep {

struct FrequencyGrid {
  double f_start = 0.0;
  double f_stop = 0.0;
  int points_per_decade = 0;
  // Uniform step in ln(f); equals ln(10)/ppd when ppd*log10(f_stop/f_start)
  // is an integer.
  double log_step = 0.0;
  std::vector<double> freqs;

  std::size_t size() const { return freqs.size(); }
  friend bool operator==(const FrequencyGrid&, const FrequencyGrid&) = default;
};

using GridPtr = std::shared_ptr<const FrequencyGrid>;

inline constexpr double kDefaultFStart = 1.0;
inline constexpr double kDefaultFStop = 1e10;
inline constexpr int kDefaultPpd = 100;
inline constexpr double kMagnitudeFloor = 1e-300;

FrequencyGrid make_grid(double f_start = kDefaultFStart, double f_stop = kDefaultFStop,
                        int points_per_decade = kDefaultPpd);

struct NodeResponse {
  std::string node;
  GridPtr grid;
  std::vector<double> magnitude;  // |V| in volts for 1 A injected
  std::vector<double> phase;      // radians
  std::vector<std::uint8_t> clamped;
  std::string error;  // non-empty when the node could not be swept

  bool ok() const { return error.empty(); }
  bool any_clamped() const;
};

// Builds a response from raw complex voltages, applying the magnitude floor.
// Values at or below `null_level` (per point) are treated as exact nulls.
NodeResponse make_response(std::string node, GridPtr grid, std::span<const mna::Complex> values,
                           std::span<const double> null_level = {});

struct SweepOptions {
  mna::AssemblyOptions assembly;
  int jobs = 0;           // <= 0: OpenMP default
  bool parallel = true;   // false: serial reference kernel
};

NodeResponse inject_node(const netlist::Netlist& net, const mna::MnaPattern& pattern, std::string_view node,
                         GridPtr grid, const SweepOptions& options = {});

std::vector<NodeResponse> sweep_all_nodes(const netlist::Netlist& net, GridPtr grid,
                                          const std::optional<std::string>& node_filter = std::nullopt,
                                          const SweepOptions& options = {});

// Case-insensitive glob ('*', '?', '[...]').
bool matches_filter(std::string_view name, std::string_view pattern);

}  // namespace loopscope::sweep
