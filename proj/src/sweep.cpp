#include "loopscope/sweep.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "loopscope/error.hpp"
#include "loopscope/kernels.hpp"

namespace loopscope::sweep {

namespace {

constexpr double kNullRelative = 64.0 * std::numeric_limits<double>::epsilon();

std::vector<double> angular(const FrequencyGrid& grid) {
  std::vector<double> w(grid.size());
  std::transform(grid.freqs.begin(), grid.freqs.end(), w.begin(),
                 [](double f) { return 2.0 * std::numbers::pi * f; });
  return w;
}

kernels::DrivingPointTable run_kernel(const mna::MnaPattern& pattern, const FrequencyGrid& grid,
                                      std::span<const std::size_t> rows, const SweepOptions& options) {
  auto omegas = angular(grid);
  if (options.parallel) return kernels::driving_points_parallel(pattern, omegas, rows, options.assembly, options.jobs);
  return kernels::driving_points_serial(pattern, omegas, rows, options.assembly);
}

NodeResponse response_from_table(std::string node, const GridPtr& grid, const kernels::DrivingPointTable& table,
                                 std::size_t slot) {
  std::vector<mna::Complex> values(table.n_freq);
  std::vector<double> null_level(table.n_freq);
  for (std::size_t fi = 0; fi < table.n_freq; ++fi) {
    const auto& s = table.at(slot, fi);
    values[fi] = s.v;
    null_level[fi] = kNullRelative * s.scale;
  }
  return make_response(std::move(node), grid, values, null_level);
}

std::size_t pivot_of(const mna::MnaPattern& pattern, const std::string& unknown) {
  auto it = std::find(pattern.unknown_names.begin(), pattern.unknown_names.end(), unknown);
  return static_cast<std::size_t>(it - pattern.unknown_names.begin());
}

}  // namespace

FrequencyGrid make_grid(double f_start, double f_stop, int points_per_decade) {
  if (!std::isfinite(f_start) || !std::isfinite(f_stop) || !(f_start > 0.0) || !(f_stop > f_start))
    throw Error(Errc::BadRange, "frequency range must satisfy 0 < f_start < f_stop");
  if (points_per_decade < 10) throw Error(Errc::BadRange, "points per decade must be at least 10");

  FrequencyGrid g;
  g.f_start = f_start;
  g.f_stop = f_stop;
  g.points_per_decade = points_per_decade;
  const double span = std::log(f_stop / f_start);
  auto count = static_cast<std::size_t>(std::llround(points_per_decade * std::log10(f_stop / f_start))) + 1;
  count = std::max<std::size_t>(count, 2);
  g.log_step = span / static_cast<double>(count - 1);
  const double x0 = std::log(f_start);
  g.freqs.resize(count);
  for (std::size_t i = 0; i < count; ++i) g.freqs[i] = std::exp(x0 + static_cast<double>(i) * g.log_step);
  g.freqs.front() = f_start;
  g.freqs.back() = f_stop;
  return g;
}

bool NodeResponse::any_clamped() const {
  return std::any_of(clamped.begin(), clamped.end(), [](auto c) { return c != 0; });
}

NodeResponse make_response(std::string node, GridPtr grid, std::span<const mna::Complex> values,
                           std::span<const double> null_level) {
  NodeResponse r;
  r.node = std::move(node);
  r.grid = std::move(grid);
  r.magnitude.resize(values.size());
  r.phase.resize(values.size());
  r.clamped.assign(values.size(), 0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    double m = std::abs(values[i]);
    if (!std::isfinite(m)) {
      r.error = "non-finite response";
      m = kMagnitudeFloor;
    }
    const double null = null_level.empty() ? 0.0 : null_level[i];
    if (m <= null || m < kMagnitudeFloor) {
      m = kMagnitudeFloor;
      r.clamped[i] = 1;
    }
    r.magnitude[i] = m;
    r.phase[i] = std::arg(values[i]);
  }
  return r;
}

NodeResponse inject_node(const netlist::Netlist& net, const mna::MnaPattern& pattern, std::string_view node,
                         GridPtr grid, const SweepOptions& options) {
  auto id = net.nodes.find(node);
  if (!id) throw Error(Errc::UnknownNode, "unknown node '" + std::string(node) + "'");
  if (*id == netlist::NodeTable::ground) throw Error(Errc::UnknownNode, "cannot inject at the ground node");

  const std::size_t row = mna::MnaPattern::node_row(*id);
  auto table = run_kernel(pattern, *grid, std::span(&row, 1), options);
  for (std::size_t fi = 0; fi < table.n_freq; ++fi) {
    if (table.failed(fi))
      throw SingularSystemError(pivot_of(pattern, table.failures[fi]), table.failures[fi], grid->freqs[fi]);
  }
  auto resp = response_from_table(net.nodes.name(*id), grid, table, 0);
  if (!resp.ok()) throw Error(Errc::SingularSystem, "node '" + resp.node + "': " + resp.error);
  return resp;
}

std::vector<NodeResponse> sweep_all_nodes(const netlist::Netlist& net, GridPtr grid,
                                          const std::optional<std::string>& node_filter, const SweepOptions& options) {
  std::vector<std::size_t> ids;
  for (std::size_t i = 1; i < net.nodes.size(); ++i)
    if (!node_filter || matches_filter(net.nodes.name(i), *node_filter)) ids.push_back(i);

  std::vector<NodeResponse> out;
  if (ids.empty()) return out;

  const auto pattern = mna::build_pattern(net);
  std::vector<std::size_t> rows(ids.size());
  std::transform(ids.begin(), ids.end(), rows.begin(), mna::MnaPattern::node_row);
  auto table = run_kernel(pattern, *grid, rows, options);

  std::string failure;
  for (std::size_t fi = 0; fi < table.n_freq && failure.empty(); ++fi) {
    if (!table.failed(fi)) continue;
    failure = SingularSystemError(pivot_of(pattern, table.failures[fi]), table.failures[fi], grid->freqs[fi]).what();
  }

  out.reserve(ids.size());
  for (std::size_t s = 0; s < ids.size(); ++s) {
    auto resp = response_from_table(net.nodes.name(ids[s]), grid, table, s);
    if (!failure.empty()) resp.error = failure;
    out.push_back(std::move(resp));
  }
  return out;
}

bool matches_filter(std::string_view name, std::string_view pattern) {
  auto n = netlist::to_lower(name);
  auto p = netlist::to_lower(pattern);
  return fnmatch(p.c_str(), n.c_str(), 0) == 0;
}

}  // namespace loopscope::sweep
