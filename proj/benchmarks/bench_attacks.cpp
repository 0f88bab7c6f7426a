#include <memory>
#include <vector>

#include <benchmark/benchmark.h>

#include "iomlab/attacks.hpp"
#include "iomlab/dataset.hpp"

namespace {

const iomlab::Corpus& corpus() {
  static const auto c = iomlab::synth_corpus({1, 2, 2, 299, iomlab::kFeatureRange, 0.02});
  return c;
}

std::vector<iomlab::GrpLeak> grp_leaks(std::size_t count, std::size_t k, std::size_t m) {
  const iomlab::SchemeParams p{299, k, m, 1, 0.06};
  std::vector<iomlab::GrpLeak> leaks;
  for (std::size_t e = 0; e < count; ++e) {
    auto s = std::make_shared<const iomlab::GrpSecret>(iomlab::grp_gen_secret(10 + e, p));
    leaks.emplace_back(s, iomlab::grp_transform(*s, corpus().users[0].samples[e]));
  }
  return leaks;
}

std::vector<iomlab::UrpLeak> urp_leaks(std::size_t k, std::size_t m, const iomlab::FeatureVector& x) {
  const iomlab::SchemeParams p{299, k, m, 2, 0.11};
  auto s = std::make_shared<const iomlab::UrpSecret>(iomlab::urp_gen_secret(20, p));
  std::vector<iomlab::UrpLeak> leaks;
  leaks.emplace_back(s, iomlab::urp_transform(*s, x));
  return leaks;
}

void BM_GrpBuildConstraints(benchmark::State& state) {
  const auto leaks = grp_leaks(static_cast<std::size_t>(state.range(0)), 16, 300);
  for (auto _ : state) benchmark::DoNotOptimize(iomlab::grp_build_constraints(leaks));
}
BENCHMARK(BM_GrpBuildConstraints)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_GrpPreimage(benchmark::State& state) {
  const auto system = iomlab::grp_build_constraints(grp_leaks(1, 16, 300));
  const auto objective =
      state.range(0) == 0 ? iomlab::opt::Objective::none() : iomlab::opt::Objective::min_squared_norm();
  for (auto _ : state) benchmark::DoNotOptimize(iomlab::grp_preimage(system, objective));
}
BENCHMARK(BM_GrpPreimage)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_UrpBuildConstraints(benchmark::State& state) {
  const auto leaks = urp_leaks(static_cast<std::size_t>(state.range(0)),
                               static_cast<std::size_t>(state.range(1)), corpus().users[0].samples[0]);
  for (auto _ : state) benchmark::DoNotOptimize(iomlab::urp_build_constraints(leaks));
}
BENCHMARK(BM_UrpBuildConstraints)->Args({16, 100})->Args({128, 600})->Unit(benchmark::kMillisecond);

void BM_UrpPreimageDesk(benchmark::State& state) {
  const auto system = iomlab::urp_build_constraints(urp_leaks(16, 100, corpus().users[0].samples[0]));
  for (auto _ : state) benchmark::DoNotOptimize(iomlab::urp_preimage(system));
}
BENCHMARK(BM_UrpPreimageDesk)->Unit(benchmark::kMillisecond);

void BM_SignGuessBits(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(iomlab::sign_guess_bits(4636.0, 299, 242.0 / 299.0));
  }
}
BENCHMARK(BM_SignGuessBits);

}  // namespace

BENCHMARK_MAIN();
