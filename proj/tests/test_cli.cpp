#include <doctest.h>

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "loopscope/cli.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using loopscope::cli::main_entry;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = main_entry(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch() {
  const auto dir = fs::temp_directory_path() / ("loopscope_cli_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

fs::path write(const std::string& name, const std::string& text) {
  const auto p = scratch() / name;
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

const std::string kNetlists = LOOPSCOPE_NETLIST_DIR;

}  // namespace

TEST_CASE("single-node run on the zeta 0.2 series RLC") {
  const auto r = cli({kNetlists + "/series_rlc.cir", "--node", "x", "--fstart", "50", "--fstop", "500k", "--ppd", "200"});
  CHECK(r.code == 2);
  CHECK(r.out.find("Loop at 5.03 kHz") != std::string::npos);
  const auto row = r.out.find("\nx\t");
  REQUIRE(row != std::string::npos);
  const double p = std::stod(r.out.substr(row + 3));
  CHECK(1 / std::sqrt(p) == doctest::Approx(0.2).epsilon(0.05));
  CHECK(r.out.find("PM 20.0 deg") != std::string::npos);
  CHECK(r.out.find("Stability curve (CSV):\nfreq_hz,mag(x),P(x)\n") != std::string::npos);
}

TEST_CASE("all-nodes run on a resistive divider is clean") {
  const auto r = cli({kNetlists + "/divider.cir", "--all-nodes"});
  CHECK(r.code == 0);
  CHECK(r.out.find("No oscillatory loops detected") != std::string::npos);
}

TEST_CASE("missing netlist reports an error and exits 1") {
  const auto r = cli({kNetlists + "/no_such_file.cir"});
  CHECK(r.code == 1);
  CHECK(r.err.find("no_such_file.cir") != std::string::npos);
  CHECK(r.out.empty());
}

TEST_CASE("netlist errors carry file and line") {
  const auto p = write("broken.cir", "broken\nR1 a 0 1k\nR2 a\n.end\n");
  const auto r = cli({p.string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("broken.cir") != std::string::npos);
  CHECK(r.err.find("line 3") != std::string::npos);
}

TEST_CASE("bad options exit 1") {
  CHECK(cli({kNetlists + "/divider.cir", "--ppd", "5"}).code == 1);
  CHECK(cli({kNetlists + "/divider.cir", "--fstart", "10", "--fstop", "1"}).code == 1);
  CHECK(cli({kNetlists + "/divider.cir", "--node", "out", "--all-nodes"}).code == 1);
  CHECK(cli({kNetlists + "/divider.cir", "--param", "noequals"}).code == 1);
  CHECK(cli({kNetlists + "/divider.cir", "--node", "nowhere"}).code == 1);
  CHECK(cli({}).code == 1);
  CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("text output is byte-stable, --stamp opts into a timestamp") {
  const std::vector<std::string> args{kNetlists + "/two_tanks.cir", "--fstart", "100", "--fstop", "50meg"};
  const auto a = cli(args), b = cli(args);
  CHECK(a.code == 2);
  CHECK(a.out == b.out);
  CHECK(a.out.find("Generated:") == std::string::npos);
  auto stamped = args;
  stamped.push_back("--stamp");
  CHECK(cli(stamped).out.find("Generated: ") != std::string::npos);
}

TEST_CASE("--param override matches editing the .param line") {
  const std::string body = "\nRt x a {rt}\nLt a b 1m\nCt b 0 1u\nRl x 0 10k\n.end\n";
  const auto base = write("trap_param.cir", "trap\n.param rt=12.6491106" + body);
  const auto edited = write("trap_edit.cir", "trap\n.param rt=31.6227766" + body);
  const auto over = cli({base.string(), "--fstart", "50", "--fstop", "500k", "--param", "RT=31.6227766"});
  const auto ref = cli({edited.string(), "--fstart", "50", "--fstop", "500k"});
  CHECK(over.code == ref.code);
  CHECK(over.out == ref.out);
  CHECK(over.out != cli({base.string(), "--fstart", "50", "--fstop", "500k"}).out);
}

TEST_CASE("output files: -o, --csv and --json") {
  const auto dir = scratch();
  const auto r = cli({kNetlists + "/two_tanks.cir", "--fstart", "100", "--fstop", "50meg", "-o",
                      (dir / "report.txt").string(), "--csv", (dir / "curves.csv").string(), "--json",
                      (dir / "report.json").string(), "--jobs", "2"});
  CHECK(r.code == 2);
  CHECK(r.out.empty());
  CHECK(slurp(dir / "report.txt").find("Loop at 500 kHz") != std::string::npos);
  CHECK(slurp(dir / "curves.csv").rfind("freq_hz,mag(ta),P(ta),mag(ua)", 0) == 0);
  const auto doc = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(doc.at("schema") == "loopscope-report-1");
  CHECK(doc.at("groups").size() == 2);
}

TEST_CASE("filter restricts the all-nodes run") {
  const auto r = cli({kNetlists + "/two_tanks.cir", "--fstart", "100", "--fstop", "50meg", "--filter", "?b"});
  CHECK(r.code == 0);
  CHECK(r.out.find("Loop at 500 kHz") != std::string::npos);
  CHECK(r.out.find("Loop at 5.00 kHz") == std::string::npos);
}

TEST_CASE("LOOPSCOPE_JOBS does not change results") {
  const std::vector<std::string> args{kNetlists + "/two_tanks.cir", "--fstart", "100", "--fstop", "50meg"};
  const auto ref = cli(args);
  ::setenv("LOOPSCOPE_JOBS", "3", 1);
  const auto env = cli(args);
  ::unsetenv("LOOPSCOPE_JOBS");
  CHECK(env.out == ref.out);
}
