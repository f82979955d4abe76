// Serial vs OpenMP timings for the hot loops. Run with EDCR_SPIKE_THREADS to cap workers.

#include <benchmark/benchmark.h>

#include <random>

#include "edcr_spike/edcr.hpp"
#include "edcr_spike/kernels.hpp"
#include "edcr_spike/parallel.hpp"
#include "fixtures.hpp"

using namespace edcr_spike;

namespace {

Exec exec_of(const benchmark::State& s) { return s.range(0) ? Exec::parallel : Exec::serial; }

void BM_MaskedCounts(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(1));
  std::mt19937_64 rng(1);
  std::bernoulli_distribution b(0.2);
  std::vector<std::vector<std::uint8_t>> data(200, std::vector<std::uint8_t>(n));
  for (auto& col : data) {
    for (auto& x : col) x = b(rng);
  }
  std::vector<kernels::Column> cols(data.begin(), data.end());
  std::vector<std::uint8_t> ma(n), mb(n);
  for (std::size_t s = 0; s < n; ++s) {
    ma[s] = b(rng);
    mb[s] = !ma[s];
  }
  std::vector<std::size_t> oa(cols.size()), ob(cols.size());
  for (auto _ : state) {
    kernels::masked_counts(cols, ma, mb, oa, ob, exec_of(state));
    benchmark::DoNotOptimize(oa.data());
  }
}
BENCHMARK(BM_MaskedCounts)->ArgsProduct({{0, 1}, {1000, 100000}});

void BM_RollingStats(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> z(100.0, 3.0);
  std::vector<double> v(static_cast<std::size_t>(state.range(1)));
  for (auto& x : v) x = z(rng);
  std::vector<double> m(v.size()), s(v.size());
  for (auto _ : state) {
    kernels::rolling_mean_std(v, 20, m, s, exec_of(state));
    benchmark::DoNotOptimize(m.data());
  }
}
BENCHMARK(BM_RollingStats)->ArgsProduct({{0, 1}, {10000, 1000000}});

void BM_DetRuleLearn(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const auto d = fixtures::rule_data(fixtures::random_instance(rng, 1000, static_cast<std::size_t>(state.range(1))));
  const auto ids = d.table.ids();
  for (auto _ : state) benchmark::DoNotOptimize(edcr::det_rule_learn(Label::no, 1e9, ids, d, exec_of(state)));
}
BENCHMARK(BM_DetRuleLearn)->ArgsProduct({{0, 1}, {50, 100, 200}})->Unit(benchmark::kMillisecond);

}  // namespace

int main(int argc, char** argv) {
  set_thread_cap(thread_cap_from_env());
  benchmark::Initialize(&argc, argv);
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
