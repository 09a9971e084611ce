// Serial vs OpenMP timings for the data-parallel kernels. The second
// benchmark argument selects the path: 0 serial, 1 parallel.

#include <benchmark/benchmark.h>

#include "bilateral/distributions.hpp"
#include "bilateral/game.hpp"
#include "bilateral/measures.hpp"
#include "bilateral/mechanisms.hpp"
#include "bilateral/worstcase.hpp"

namespace {

using namespace bilateral;

Exec exec_of(const benchmark::State& s) { return s.range(1) ? Exec::Parallel : Exec::Serial; }

void BM_McOracle(benchmark::State& state) {
  const auto S = make_mixture({{0.5, make_uniform(0, 1)}, {0.5, point_mass(0.5)}});
  const auto B = make_exponential(1.0);
  const auto rule = fixed_price_rule(0.5);
  for (auto _ : state) {
    auto r = mc_oracle(*S, *B, rule, static_cast<std::size_t>(state.range(0)), Seed{42}, exec_of(state));
    benchmark::DoNotOptimize(r.w_at_p);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_McOracle)->Args({1 << 20, 0})->Args({1 << 20, 1})->Unit(benchmark::kMillisecond);

void BM_BestFixedPrice(benchmark::State& state) {
  const auto S = make_uniform(0, 1);
  const auto B = make_exponential(2.0);
  for (auto _ : state) {
    auto r = best_fixed_price(*S, *B, static_cast<int>(state.range(0)), {}, exec_of(state));
    benchmark::DoNotOptimize(r.price);
  }
}
BENCHMARK(BM_BestFixedPrice)->Args({1024, 0})->Args({1024, 1})->Unit(benchmark::kMillisecond);

void BM_MinimaxFull3D(benchmark::State& state) {
  for (auto _ : state) {
    auto r = minimax_scan(static_cast<int>(state.range(0)), ScanMode::Full3D, exec_of(state));
    benchmark::DoNotOptimize(r.best_value);
  }
}
BENCHMARK(BM_MinimaxFull3D)->Args({200, 0})->Args({200, 1})->Unit(benchmark::kMillisecond);

void BM_SimulateGame(benchmark::State& state) {
  GameConfig cfg;
  cfg.x_grid = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto r = simulate_game(cfg, {}, exec_of(state));
    benchmark::DoNotOptimize(r.sup_value);
  }
}
BENCHMARK(BM_SimulateGame)->Args({200, 0})->Args({200, 1})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
