#include <json.hpp>

#include "loopscope/error.hpp"
#include "loopscope/report.hpp"

namespace loopscope::report {

using nlohmann::json;
using stability::PeakKind;
using stability::Severity;

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> number_or_null(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

Severity severity_from(const std::string& s) {
  for (auto sv : {Severity::UnstableRisk, Severity::Marginal, Severity::Acceptable, Severity::Ungraded})
    if (s == stability::severity_name(sv)) return sv;
  throw Error(Errc::SyntaxError, "unknown severity '" + s + "'");
}

json peak_json(const Peak& p) {
  return {
      {"node", p.node},
      {"kind", stability::kind_name(p.kind)},
      {"natural_freq_hz", p.natural_freq},
      {"p_value", p.p_value},
      {"zeta", optional_number(p.zeta)},
      {"phase_margin_deg", optional_number(p.phase_margin_deg)},
      {"overshoot_pct", optional_number(p.overshoot_pct)},
      {"flags", stability::flag_names(p.flags)},
      {"index", p.index},
      {"severity", stability::severity_name(p.severity)},
      {"oscillatory", p.oscillatory},
  };
}

Peak peak_from(const json& j) {
  Peak p;
  p.node = j.at("node").get<std::string>();
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "ComplexPole") p.kind = PeakKind::ComplexPole;
  else if (kind == "ComplexZero") p.kind = PeakKind::ComplexZero;
  else throw Error(Errc::SyntaxError, "unknown peak kind '" + kind + "'");
  p.natural_freq = j.at("natural_freq_hz").get<double>();
  p.p_value = j.at("p_value").get<double>();
  p.zeta = number_or_null(j, "zeta");
  p.phase_margin_deg = number_or_null(j, "phase_margin_deg");
  p.overshoot_pct = number_or_null(j, "overshoot_pct");
  for (const auto& f : j.at("flags")) p.flags |= stability::flag_from_name(f.get<std::string>());
  p.index = j.at("index").get<std::size_t>();
  p.severity = severity_from(j.at("severity").get<std::string>());
  p.oscillatory = j.at("oscillatory").get<bool>();
  return p;
}

}  // namespace

std::string render_json(const StabilityReport& report) {
  json groups = json::array();
  for (const auto& g : report.groups) {
    json members = json::array();
    for (const auto& m : g.members) members.push_back(peak_json(m));
    groups.push_back({
        {"label_freq_hz", g.label_freq},
        {"worst_zeta", optional_number(g.worst_zeta)},
        {"worst_node", g.worst_node},
        {"severity", stability::severity_name(g.severity)},
        {"members", std::move(members)},
    });
  }
  json zeros = json::array();
  for (const auto& z : report.zeros) zeros.push_back(peak_json(z));

  json doc = {
      {"schema", kJsonSchema},
      {"netlist_title", report.netlist_title},
      {"grid",
       {{"f_start_hz", report.grid.f_start},
        {"f_stop_hz", report.grid.f_stop},
        {"points_per_decade", report.grid.points_per_decade},
        {"points", report.grid.points}}},
      {"floor", report.floor},
      {"rel_gap", report.rel_gap},
      {"groups", std::move(groups)},
      {"zeros", std::move(zeros)},
      {"warnings", report.warnings},
      {"per_node_errors", report.per_node_errors},
  };
  if (report.stamp) doc["stamp"] = *report.stamp;
  return doc.dump(2) + "\n";
}

StabilityReport parse_json(const std::string& text) {
  try {
    const auto doc = json::parse(text);
    if (doc.at("schema") != kJsonSchema) throw Error(Errc::SyntaxError, "unsupported report schema");
    StabilityReport r;
    r.netlist_title = doc.at("netlist_title").get<std::string>();
    const auto& grid = doc.at("grid");
    r.grid = {grid.at("f_start_hz").get<double>(), grid.at("f_stop_hz").get<double>(),
              grid.at("points_per_decade").get<int>(), grid.at("points").get<std::size_t>()};
    r.floor = doc.at("floor").get<double>();
    r.rel_gap = doc.at("rel_gap").get<double>();
    for (const auto& g : doc.at("groups")) {
      LoopGroup lg;
      lg.label_freq = g.at("label_freq_hz").get<double>();
      lg.worst_zeta = number_or_null(g, "worst_zeta");
      lg.worst_node = g.at("worst_node").get<std::string>();
      lg.severity = severity_from(g.at("severity").get<std::string>());
      for (const auto& m : g.at("members")) lg.members.push_back(peak_from(m));
      r.groups.push_back(std::move(lg));
    }
    for (const auto& z : doc.at("zeros")) r.zeros.push_back(peak_from(z));
    r.warnings = doc.at("warnings").get<std::vector<std::string>>();
    r.per_node_errors = doc.at("per_node_errors").get<std::map<std::string, std::string>>();
    if (doc.contains("stamp")) r.stamp = doc.at("stamp").get<std::string>();
    return r;
  } catch (const json::exception& e) {
    throw Error(Errc::SyntaxError, std::string("invalid report JSON: ") + e.what());
  }
}

}  // namespace loopscope::report
