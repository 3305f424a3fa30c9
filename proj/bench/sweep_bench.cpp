#include <benchmark/benchmark.h>

#include <numbers>
#include <string>
#include <vector>

#include "loopscope/kernels.hpp"
#include "loopscope/netlist.hpp"
#include "loopscope/sweep.hpp"

namespace {

using namespace loopscope;

netlist::Netlist rc_ladder(int sections) {
  std::string text = "rc ladder\nR0 in 0 1k\n";
  for (int i = 0; i < sections; ++i) {
    const std::string a = i == 0 ? "in" : "n" + std::to_string(i);
    const std::string b = "n" + std::to_string(i + 1);
    text += "R" + std::to_string(i + 1) + " " + a + " " + b + " 100\n";
    text += "C" + std::to_string(i + 1) + " " + b + " 0 10n\n";
  }
  return netlist::elaborate(netlist::parse(text + ".end\n"));
}

struct Fixture {
  netlist::Netlist net;
  mna::MnaPattern pattern;
  std::vector<double> omegas;
  std::vector<std::size_t> rows;

  explicit Fixture(int sections) : net(rc_ladder(sections)), pattern(mna::build_pattern(net)) {
    for (double f : sweep::make_grid(10.0, 1e8, 100).freqs) omegas.push_back(2 * std::numbers::pi * f);
    for (std::size_t i = 0; i < pattern.n_nodes; ++i) rows.push_back(i);
  }
};

void bm_serial(benchmark::State& state) {
  Fixture fx(static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(kernels::driving_points_serial(fx.pattern, fx.omegas, fx.rows, {}));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(fx.omegas.size()));
}

void bm_parallel(benchmark::State& state) {
  Fixture fx(static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(kernels::driving_points_parallel(fx.pattern, fx.omegas, fx.rows, {}));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(fx.omegas.size()));
}

}  // namespace

BENCHMARK(bm_serial)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_parallel)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
