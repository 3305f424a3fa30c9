#include "loopscope/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <tuple>
#include <utility>

#include "loopscope/error.hpp"

namespace loopscope::report {

using stability::PeakKind;
using stability::Severity;

namespace {

bool peak_order(const Peak& a, const Peak& b) {
  return std::tie(a.natural_freq, a.p_value, a.node, a.index, a.flags) <
         std::tie(b.natural_freq, b.p_value, b.node, b.index, b.flags);
}

bool member_order(const Peak& a, const Peak& b) {
  const double ma = std::abs(a.p_value), mb = std::abs(b.p_value);
  if (ma != mb) return ma > mb;
  return peak_order(a, b);
}

LoopGroup finish_group(std::vector<Peak> members) {
  std::sort(members.begin(), members.end(), member_order);
  LoopGroup g;
  g.label_freq = members.front().natural_freq;
  g.worst_node = members.front().node;
  for (const auto& m : members) {
    if (!m.graded() || !m.zeta) continue;
    if (!g.worst_zeta || *m.zeta < *g.worst_zeta) g.worst_zeta = *m.zeta;
    if (g.severity == Severity::Ungraded || m.severity < g.severity) g.severity = m.severity;
  }
  g.members = std::move(members);
  return g;
}

std::string printf_string(const char* fmt, auto... args) {
  char buf[128];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

std::string shortest(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, r.ptr};
}

std::string flag_suffix(unsigned flags) {
  std::string out;
  for (const auto& f : stability::flag_names(flags)) out += " [" + f + "]";
  return out;
}

std::string peak_row(const Peak& p) {
  return p.node + printf_string("\t%.6f\t%.2E", std::abs(p.p_value), p.natural_freq) + flag_suffix(p.flags);
}

std::string summary_line(const LoopGroup& g) {
  if (!g.worst_zeta) return "  Summary: no gradable members (Ungraded)";
  const auto est = stability::table1_lookup(*g.worst_zeta);
  std::string pm = est.phase_margin_deg ? printf_string("%.1f deg", *est.phase_margin_deg) : "> 70 deg";
  std::string s = printf_string("  Summary: worst zeta %.3f", *g.worst_zeta) + " (node " + g.worst_node + "), PM " +
                  pm + printf_string(", overshoot %.1f%%, ", est.overshoot_pct) + stability::severity_name(g.severity);
  if (*g.worst_zeta >= 1.0) s += " (non-oscillatory)";
  return s;
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::vector<LoopGroup> group_loops(std::vector<Peak> peaks, double rel_gap) {
  std::erase_if(peaks, [](const Peak& p) { return p.kind != PeakKind::ComplexPole; });
  std::sort(peaks.begin(), peaks.end(), peak_order);

  std::vector<LoopGroup> groups;
  const double gap = std::log1p(rel_gap);
  std::vector<Peak> current;
  for (auto& p : peaks) {
    if (!current.empty() && std::log(p.natural_freq / current.back().natural_freq) > gap)
      groups.push_back(finish_group(std::exchange(current, {})));
    current.push_back(std::move(p));
  }
  if (!current.empty()) groups.push_back(finish_group(std::move(current)));
  return groups;
}

GridSummary summarize(const sweep::FrequencyGrid& grid) {
  return {grid.f_start, grid.f_stop, grid.points_per_decade, grid.size()};
}

StabilityReport build_report(std::string title, const GridSummary& grid, const std::vector<Peak>& peaks,
                             double rel_gap) {
  StabilityReport r;
  r.netlist_title = std::move(title);
  r.grid = grid;
  r.rel_gap = rel_gap;
  r.groups = group_loops(peaks, rel_gap);
  for (const auto& p : peaks)
    if (p.kind == PeakKind::ComplexZero) r.zeros.push_back(p);
  std::sort(r.zeros.begin(), r.zeros.end(), peak_order);
  return r;
}

std::string engineering_hz(double hz) {
  if (!std::isfinite(hz) || hz <= 0.0) return printf_string("%g Hz", hz);
  static constexpr const char* prefixes[] = {"m", "", "k", "M", "G", "T", "P"};
  int exp3 = static_cast<int>(std::floor(std::log10(hz) / 3.0)) * 3;
  exp3 = std::clamp(exp3, -3, 15);
  for (;;) {
    const double mant = hz / std::pow(10.0, exp3);
    const int decimals = std::max(0, 2 - static_cast<int>(std::floor(std::log10(std::max(mant, 1.0)))));
    const double scale = std::pow(10.0, decimals);
    const double rounded = std::round(mant * scale) / scale;
    if (rounded >= 1000.0 && exp3 < 15) {
      exp3 += 3;
      continue;
    }
    return printf_string("%.*f ", decimals, rounded) + prefixes[(exp3 + 3) / 3] + "Hz";
  }
}

std::string render_text(const StabilityReport& report) {
  std::string out;
  auto line = [&out](const std::string& s) { out += s + "\n"; };

  line("Stability report: " + report.netlist_title);
  line("Sweep: " + engineering_hz(report.grid.f_start) + " to " + engineering_hz(report.grid.f_stop) + ", " +
       std::to_string(report.grid.points_per_decade) + " points/decade, " + std::to_string(report.grid.points) +
       " points; floor " + shortest(report.floor) + ", loop gap " + shortest(report.rel_gap * 100.0) + "%");
  if (report.stamp) line("Generated: " + *report.stamp);
  line("");

  if (report.groups.empty()) {
    line("No oscillatory loops detected above floor.");
  } else {
    line("Node\tStability Peak\tNatural Frequency, Hz");
    for (const auto& g : report.groups) {
      line("Loop at " + engineering_hz(g.label_freq));
      for (const auto& m : g.members) line(peak_row(m));
      line(summary_line(g));
    }
  }

  if (!report.zeros.empty()) {
    line("");
    line("Complex zeros:");
    for (const auto& z : report.zeros) line(peak_row(z));
  }
  if (!report.per_node_errors.empty()) {
    line("");
    line("Node errors:");
    for (const auto& [node, msg] : report.per_node_errors) line("  " + node + ": " + msg);
  }
  line("");
  line("Warnings:");
  if (report.warnings.empty()) line("  none");
  for (const auto& w : report.warnings) line("  - " + w);
  return out;
}

std::string render_curves_csv(const std::vector<stability::StabilityCurve>& curves,
                              const std::vector<sweep::NodeResponse>& responses) {
  if (curves.size() != responses.size())
    throw Error(Errc::MismatchedGrids, "curve and response lists differ in length");
  if (curves.empty()) return "freq_hz\n";

  const auto& grid = responses.front().grid;
  for (std::size_t i = 0; i < responses.size(); ++i) {
    const auto& g = responses[i].grid;
    if (!g || !grid || (g != grid && !(*g == *grid)))
      throw Error(Errc::MismatchedGrids, "node '" + responses[i].node + "' was swept on a different grid");
    if (curves[i].size() + 2 != g->size() || responses[i].magnitude.size() != g->size())
      throw Error(Errc::MismatchedGrids, "curve for node '" + curves[i].node + "' does not match its grid");
  }

  std::string out = "freq_hz";
  for (const auto& c : curves) out += "," + csv_cell("mag(" + c.node + ")") + "," + csv_cell("P(" + c.node + ")");
  out += "\n";
  for (std::size_t k = 0; k < curves.front().size(); ++k) {
    out += shortest(grid->freqs[k + 1]);
    for (std::size_t i = 0; i < curves.size(); ++i)
      out += "," + shortest(responses[i].magnitude[k + 1]) + "," + shortest(curves[i].p[k]);
    out += "\n";
  }
  return out;
}

}  // namespace loopscope::report
