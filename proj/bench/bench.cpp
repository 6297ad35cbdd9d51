// Serial reference kernels against their OpenMP counterparts. Each pair takes
// the same inputs; the parallel variants must produce identical results.

#include <benchmark/benchmark.h>

#include <random>

#include "eml/master.hpp"
#include "eml/shortest.hpp"
#include "eml/vm.hpp"
#include "random_programs.hpp"

using namespace eml;

namespace {

std::vector<vm::Program> programs(std::size_t n) {
  std::mt19937_64 rng(1);
  const std::vector<std::string> vars{"x", "y"};
  std::vector<vm::Program> out;
  for (std::size_t i = 0; i < n; ++i) out.emplace_back(RpnProgram::parse_compact(testing::random_compact(rng, 41)), vars);
  return out;
}

void vm_batch(benchmark::State& state, bool parallel) {
  const auto ps = programs(static_cast<std::size_t>(state.range(0)));
  const std::vector<Complex> vars{0.8, -1.3};
  std::vector<Complex> out(ps.size());
  for (auto _ : state) {
    if (parallel) {
      vm::run_batch_parallel(ps, vars, out);
    } else {
      vm::run_batch_serial(ps, vars, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void shortest_search(benchmark::State& state, bool parallel) {
  const Target t = Target::from_expression("x-y", "x - y");
  SearchOptions o;
  o.parallel = parallel;
  for (auto _ : state) benchmark::DoNotOptimize(shortest(SearchTask{t, static_cast<int>(state.range(0)), true, false}, o));
}

void campaign(benchmark::State& state, bool parallel) {
  const Expr target = from_rpn(RpnProgram::parse_compact("x1E"));
  const auto data = sr::sample_target(target, "x", 0.5, 4.0, 64);
  sr::FitConfig cfg;
  cfg.steps = 500;
  cfg.hardening_steps = 300;
  for (auto _ : state) benchmark::DoNotOptimize(sr::blind_campaign(2, data, cfg, static_cast<int>(state.range(0)), false, parallel));
}

}  // namespace

BENCHMARK_CAPTURE(vm_batch, serial, false)->Arg(20000);
BENCHMARK_CAPTURE(vm_batch, parallel, true)->Arg(20000);
BENCHMARK_CAPTURE(shortest_search, serial, false)->Arg(13)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(shortest_search, parallel, true)->Arg(13)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(campaign, serial, false)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(campaign, parallel, true)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
