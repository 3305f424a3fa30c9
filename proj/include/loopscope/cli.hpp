#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "loopscope/mna.hpp"
#include "loopscope/report.hpp"
#include "loopscope/sweep.hpp"

namespace loopscope::cli {

struct SingleNode {
  std::string node;
};

struct AllNodes {
  std::optional<std::string> filter;
};

struct RunConfig {
  std::filesystem::path netlist_path;
  std::variant<SingleNode, AllNodes> mode = AllNodes{};
  double f_start = sweep::kDefaultFStart;
  double f_stop = sweep::kDefaultFStop;
  int ppd = sweep::kDefaultPpd;
  double floor = 0.1;
  double rel_gap = report::kDefaultRelGap;
  double gmin = mna::kDefaultGmin;
  std::optional<std::filesystem::path> text_path;  // stdout when absent
  std::optional<std::filesystem::path> csv_path;
  std::optional<std::filesystem::path> json_path;
  std::map<std::string, double> params;
  int jobs = 0;
  bool stamp = false;
};

enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitUnstable = 2 };

// Throws loopscope::Error(BadRange) on out-of-range numeric options.
void validate(const RunConfig& config);

// Everything after the program name; returns the process exit status.
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(const RunConfig& config, std::ostream& out, std::ostream& err);

// Result of a run without the file/stream side effects.
struct Analysis {
  report::StabilityReport report;
  std::vector<stability::StabilityCurve> curves;
  std::vector<sweep::NodeResponse> responses;
};

Analysis analyze(const RunConfig& config);

int exit_status(const report::StabilityReport& report);

}  // namespace loopscope::cli
