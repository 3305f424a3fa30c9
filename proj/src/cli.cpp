#include "loopscope/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <memory>

#include "loopscope/error.hpp"
#include "loopscope/netlist.hpp"

namespace loopscope::cli {

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::Io, "cannot open '" + path.string() + "' for writing");
  f << text;
  if (!f) throw Error(Errc::Io, "failed writing '" + path.string() + "'");
}

std::string utc_stamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string clamp_warning(const sweep::NodeResponse& r) {
  const auto n = std::count(r.clamped.begin(), r.clamped.end(), std::uint8_t{1});
  return "node '" + r.node + "': " + std::to_string(n) + " of " + std::to_string(r.clamped.size()) +
         " points at the magnitude floor, excluded from peak detection";
}

std::pair<std::string, double> split_param(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == text.size())
    throw Error(Errc::SyntaxError, "--param expects NAME=VALUE, got '" + text + "'");
  return {netlist::to_lower(text.substr(0, eq)), netlist::parse_value(text.substr(eq + 1))};
}

// Lets numeric options take SPICE suffixes ("500k", "10meg").
CLI::Validator spice_number() {
  return CLI::Validator(
      [](std::string& text) {
        try {
          char buf[40];
          std::snprintf(buf, sizeof buf, "%.17g", netlist::parse_value(text));
          text = buf;
          return std::string();
        } catch (const Error& e) {
          return std::string(e.what());
        }
      },
      "NUMBER");
}

}  // namespace

void validate(const RunConfig& c) {
  if (!(c.f_start > 0.0) || !(c.f_stop > c.f_start) || !std::isfinite(c.f_stop))
    throw Error(Errc::BadRange, "need 0 < --fstart < --fstop");
  if (c.ppd < 10) throw Error(Errc::BadRange, "--ppd must be at least 10");
  if (!(c.floor >= 0.0) || !std::isfinite(c.floor)) throw Error(Errc::BadRange, "--floor must be non-negative");
  if (!(c.rel_gap > 0.0) || !std::isfinite(c.rel_gap)) throw Error(Errc::BadRange, "--gap must be positive");
  if (!(c.gmin >= 0.0) || !std::isfinite(c.gmin)) throw Error(Errc::BadRange, "--gmin must be non-negative");
  if (c.jobs < 0) throw Error(Errc::BadRange, "--jobs must be non-negative");
  if (const auto* s = std::get_if<SingleNode>(&c.mode); s && s->node.empty())
    throw Error(Errc::BadRange, "--node needs a node name");
}

Analysis analyze(const RunConfig& config) {
  validate(config);
  const auto parsed = netlist::parse_file(config.netlist_path);
  const auto net = netlist::elaborate(parsed, config.params);
  const auto grid = std::make_shared<const sweep::FrequencyGrid>(
      sweep::make_grid(config.f_start, config.f_stop, config.ppd));

  sweep::SweepOptions sweep_opts;
  sweep_opts.assembly.gmin = config.gmin;
  sweep_opts.jobs = config.jobs;
  stability::DetectOptions detect;
  detect.floor = config.floor;

  Analysis a;
  if (const auto* single = std::get_if<SingleNode>(&config.mode)) {
    const auto pattern = mna::build_pattern(net);
    a.responses.push_back(sweep::inject_node(net, pattern, single->node, grid, sweep_opts));
  } else {
    a.responses = sweep::sweep_all_nodes(net, grid, std::get<AllNodes>(config.mode).filter, sweep_opts);
  }

  std::vector<stability::Peak> peaks;
  std::vector<std::string> warnings = net.warnings;
  std::map<std::string, std::string> errors;
  std::vector<sweep::NodeResponse> usable;
  for (auto& r : a.responses) {
    if (!r.ok()) {
      errors[r.node] = r.error;
      continue;
    }
    if (r.any_clamped()) warnings.push_back(clamp_warning(r));
    auto curve = stability::stability_curve(r);
    auto found = stability::detect_peaks(curve, detect);
    peaks.insert(peaks.end(), found.begin(), found.end());
    a.curves.push_back(std::move(curve));
    usable.push_back(std::move(r));
  }
  a.responses = std::move(usable);

  a.report = report::build_report(net.title, report::summarize(*grid), peaks, config.rel_gap);
  a.report.floor = config.floor;
  a.report.warnings = std::move(warnings);
  a.report.per_node_errors = std::move(errors);
  if (config.stamp) a.report.stamp = utc_stamp();
  return a;
}

int exit_status(const report::StabilityReport& r) {
  const bool risk = std::any_of(r.groups.begin(), r.groups.end(),
                                [](const auto& g) { return g.severity == stability::Severity::UnstableRisk; });
  return risk ? kExitUnstable : kExitOk;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    const auto a = analyze(config);
    std::string text = report::render_text(a.report);
    const std::string csv = report::render_curves_csv(a.curves, a.responses);
    if (std::holds_alternative<SingleNode>(config.mode) && !config.csv_path)
      text += "\nStability curve (CSV):\n" + csv;

    if (config.text_path) write_file(*config.text_path, text);
    else out << text;
    if (config.csv_path) write_file(*config.csv_path, csv);
    if (config.json_path) write_file(*config.json_path, report::render_json(a.report));
    return exit_status(a.report);
  } catch (const Error& e) {
    err << "loopscope: error: ";
    if (e.line() > 0) err << config.netlist_path.string() << ": ";
    err << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    err << "loopscope: error: " << e.what() << "\n";
    return kExitError;
  }
}

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Closed-loop AC stability analysis by per-node current injection", "loopscope"};
  RunConfig c;
  std::string netlist_path, node, filter, text_path, csv_path, json_path;
  std::vector<std::string> params;

  app.add_option("netlist", netlist_path, "SPICE-subset netlist file")->required();
  auto* node_opt = app.add_option("--node", node, "Single-node run: inject at this node");
  auto* all_opt = app.add_flag("--all-nodes", "All-nodes run (default)");
  auto* filter_opt = app.add_option("--filter", filter, "Glob restricting all-nodes run, e.g. 'X1.*'");
  node_opt->excludes(all_opt)->excludes(filter_opt);
  app.add_option("--fstart", c.f_start, "Sweep start frequency, Hz")->transform(spice_number())->capture_default_str();
  app.add_option("--fstop", c.f_stop, "Sweep stop frequency, Hz")->transform(spice_number())->capture_default_str();
  app.add_option("--ppd", c.ppd, "Grid points per decade")->capture_default_str();
  app.add_option("--floor", c.floor, "Peak detection floor on |P|")->capture_default_str();
  app.add_option("--gap", c.rel_gap, "Relative frequency gap separating loops")->capture_default_str();
  app.add_option("--gmin", c.gmin, "Node-to-ground conductance, S")->transform(spice_number())->capture_default_str();
  app.add_option("-o,--output", text_path, "Write the text report here instead of stdout");
  app.add_option("--csv", csv_path, "Write stability curves as CSV");
  app.add_option("--json", json_path, "Write the report as JSON");
  app.add_option("--param", params, "Override a .param value, NAME=VALUE")->allow_extra_args(false);
  app.add_option("--jobs", c.jobs, "Worker threads (0: all available)")->envname("LOOPSCOPE_JOBS");
  app.add_flag("--stamp", c.stamp, "Add a generation timestamp to the report");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    c.netlist_path = netlist_path;
    if (*node_opt) c.mode = SingleNode{node};
    else c.mode = AllNodes{*filter_opt ? std::optional<std::string>(filter) : std::nullopt};
    if (!text_path.empty()) c.text_path = text_path;
    if (!csv_path.empty()) c.csv_path = csv_path;
    if (!json_path.empty()) c.json_path = json_path;
    for (const auto& p : params) {
      auto [name, value] = split_param(p);
      c.params.insert_or_assign(name, value);
    }
  } catch (const Error& e) {
    err << "loopscope: error: " << e.what() << "\n";
    return kExitError;
  }
  return run(c, out, err);
}

}  // namespace loopscope::cli
