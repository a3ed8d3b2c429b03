// Serial reference kernels against their OpenMP versions.

#include <benchmark/benchmark.h>

#include "momlab/combinatorics.hpp"
#include "momlab/model_mc.hpp"
#include "momlab/moments.hpp"

using namespace momlab;

namespace {

Exec exec_arg(const benchmark::State& st) { return st.range(0) ? Exec::parallel : Exec::serial; }

struct Family {
  CharacterGroup g{5};
  Weight w = make_weight("selfconv:sech");
  ZeroStore store;
  std::unique_ptr<ZeroFamily> fam;
  Family() {
    double T = auto_zero_height(w, 5, 1e-10);
    ensure_all_zeros(store, g, T, default_cache_root());
    fam = std::make_unique<ZeroFamily>(g, w, store, T);
  }
};

Family& family() {
  static Family f;
  return f;
}

void BM_ProgressionSums(benchmark::State& st) {
  Weight w = make_weight("selfconv:sech");
  std::vector<double> ts;
  for (int k = 0; k < 64; ++k) ts.push_back(2 + 0.2 * k);
  ProgressionSums::Options o;
  o.X = 5'000'000;
  o.exec = exec_arg(st);
  for (auto _ : st) benchmark::DoNotOptimize(ProgressionSums(12, w, ts, o).class_sum(1, 0));
}

void BM_SampleH(benchmark::State& st) {
  auto& f = family();
  for (auto _ : st)
    benchmark::DoNotOptimize(
        sample_H(*f.fam, 2, ModelMode::li, 1, 20000, 1e4, 1e10, exec_arg(st)).values.back());
}

void BM_DeltaSum(benchmark::State& st) {
  auto& f = family();
  SpectralOptions o;
  o.exec = exec_arg(st);
  ZeroRows rows(*f.fam, 2, o);
  Kernel K = make_kernel("triangle");
  for (auto _ : st) benchmark::DoNotOptimize(delta_sum(rows, 2, K, 50, false, o).value);
}

void BM_EnumerateClasses(benchmark::State& st) {
  EnumerationOptions o;
  o.exec = exec_arg(st);
  for (auto _ : st) benchmark::DoNotOptimize(enumerate_classes(4, 3, o).F);
}

}  // namespace

BENCHMARK(BM_ProgressionSums)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SampleH)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DeltaSum)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnumerateClasses)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
