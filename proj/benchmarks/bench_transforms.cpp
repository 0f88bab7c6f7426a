#include <benchmark/benchmark.h>

#include "iomlab/dataset.hpp"
#include "iomlab/grp.hpp"
#include "iomlab/urp.hpp"

namespace {

const iomlab::Corpus& corpus() {
  static const auto c = iomlab::synth_corpus({1, 2, 1, 299, iomlab::kFeatureRange, 0.02});
  return c;
}

void BM_GrpGenSecret(benchmark::State& state) {
  const iomlab::SchemeParams p{299, static_cast<std::size_t>(state.range(0)),
                               static_cast<std::size_t>(state.range(1)), 1, 0.06};
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(iomlab::grp_gen_secret(++seed, p));
}
BENCHMARK(BM_GrpGenSecret)->Args({16, 300})->Unit(benchmark::kMillisecond);

void BM_GrpTransform(benchmark::State& state) {
  const iomlab::SchemeParams p{299, static_cast<std::size_t>(state.range(0)),
                               static_cast<std::size_t>(state.range(1)), 1, 0.06};
  const auto secret = iomlab::grp_gen_secret(1, p);
  const auto& x = corpus().users[0].samples[0];
  for (auto _ : state) benchmark::DoNotOptimize(iomlab::grp_transform(secret, x));
}
BENCHMARK(BM_GrpTransform)->Args({16, 300})->Args({16, 100})->Unit(benchmark::kMicrosecond);

void BM_UrpTransform(benchmark::State& state) {
  const iomlab::SchemeParams p{299, static_cast<std::size_t>(state.range(0)),
                               static_cast<std::size_t>(state.range(1)), 2, 0.11};
  const auto secret = iomlab::urp_gen_secret(1, p);
  const auto& x = corpus().users[0].samples[0];
  for (auto _ : state) benchmark::DoNotOptimize(iomlab::urp_transform(secret, x));
}
BENCHMARK(BM_UrpTransform)->Args({128, 600})->Args({16, 100})->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
