#include <benchmark/benchmark.h>

#include "mpcmm/experiment.hpp"
#include "mpcmm/square.hpp"

using namespace mpcmm;

static void BM_NaiveMultiplyReference(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto& s = integer_semiring();
  const auto a = random_dense(n, n, s, 1);
  const auto b = random_dense(n, n, s, 2);
  for (auto _ : state) benchmark::DoNotOptimize(naive_multiply_reference(a, b, s));
}
BENCHMARK(BM_NaiveMultiplyReference)->Arg(64)->Arg(128)->Arg(256);

static void BM_NaiveMultiply(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto& s = integer_semiring();
  const auto a = random_dense(n, n, s, 1);
  const auto b = random_dense(n, n, s, 2);
  for (auto _ : state) benchmark::DoNotOptimize(naive_multiply(a, b, s));
}
BENCHMARK(BM_NaiveMultiply)->Arg(64)->Arg(128)->Arg(256);

static void BM_SquareSchedule(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto mode = state.range(1) == 0 ? Execution::serial : Execution::parallel;
  const auto& s = integer_semiring();
  const auto a = random_dense(n, n, s, 1);
  const auto b = random_dense(n, n, s, 2);
  SquareOptions opt;
  opt.execution = mode;
  const auto sched = schedule_square(ProblemShape{n, 0, 1.0}, a, b, s, opt);
  for (auto _ : state) benchmark::DoNotOptimize(execute(sched));
}
BENCHMARK(BM_SquareSchedule)->Args({64, 0})->Args({64, 1})->Args({256, 0})->Args({256, 1});

BENCHMARK_MAIN();
