// Serial reference vs OpenMP kernels: dense layers and the exact DP sweep.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "evtol/kernels.hpp"
#include "evtol/oracle.hpp"
#include "evtol/scenario.hpp"

using namespace evtol;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

kernels::Exec exec_of(const benchmark::State& state) {
  return state.range(0) == 0 ? kernels::Exec::serial : kernels::Exec::parallel;
}

void args(benchmark::internal::Benchmark* b) {
  for (int exec : {0, 1})
    for (int width : {128, 256, 512}) b->Args({exec, width});
}

void BM_DenseForward(benchmark::State& state) {
  const std::size_t batch = 32, width = state.range(1);
  const auto w = random_vec(width * width, 1), bias = random_vec(width, 2), x = random_vec(batch * width, 3);
  std::vector<double> y(batch * width);
  for (auto _ : state) {
    kernels::dense_forward(exec_of(state), w, bias, x, y, batch, width, width, true);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetLabel(state.range(0) == 0 ? "serial" : "parallel");
}
BENCHMARK(BM_DenseForward)->Apply(args);

void BM_DenseBackward(benchmark::State& state) {
  const std::size_t batch = 32, width = state.range(1);
  const auto w = random_vec(width * width, 1), x = random_vec(batch * width, 3);
  const auto delta = random_vec(batch * width, 4);
  std::vector<double> dw(width * width), db(width), dx(batch * width);
  for (auto _ : state) {
    kernels::dense_weight_grad(exec_of(state), delta, x, dw, db, batch, width, width);
    kernels::dense_input_grad(exec_of(state), w, delta, dx, batch, width, width);
    benchmark::DoNotOptimize(dw.data());
    benchmark::DoNotOptimize(dx.data());
  }
  state.SetLabel(state.range(0) == 0 ? "serial" : "parallel");
}
BENCHMARK(BM_DenseBackward)->Apply(args);

void BM_OracleSweep(benchmark::State& state) {
  const Scenario s = load_scenario(std::string(EVTOL_DATA_DIR) + "/scenarios/desk_m3_n2.json");
  oracle::OracleOptions opts;
  opts.exec = exec_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(oracle::solve_exact(s, opts).profit);
  state.SetLabel(state.range(0) == 0 ? "serial" : "parallel");
}
BENCHMARK(BM_OracleSweep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
