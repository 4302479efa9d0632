// Microbenchmarks of the hot paths: noise sampling, histogram construction,
// and the two end-to-end mechanisms at the default experiment scale n = 1e6.
#include <benchmark/benchmark.h>

#include "bnv/distributions.hpp"
#include "bnv/histogram.hpp"
#include "bnv/interior_point.hpp"
#include "bnv/median.hpp"
#include "bnv/noise.hpp"

namespace {

using namespace bnv;

const PrivacyBudget kBudget{1.0, 1e-6};

Dataset gaussian_data(std::size_t n) {
  Rng rng(5150);
  return Distribution::gaussian(0.0, 1.0).sample_n(n, rng);
}

void BM_tlap_sample(benchmark::State& state) {
  const TLapParams p = histogram_noise(kBudget);
  Rng rng(7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(tlap_sample(p, rng));
  }
}
BENCHMARK(BM_tlap_sample);

void BM_build_noisy_histogram(benchmark::State& state) {
  const Dataset x = gaussian_data(static_cast<std::size_t>(state.range(0)));
  const TLapParams p = histogram_noise(kBudget);
  const auto binner = [](double v) { return uniform_bin(v, 0.03); };
  Rng rng(11);
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_noisy_histogram(x, binner, p, rng));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_build_noisy_histogram)->Arg(100'000)->Arg(1'000'000);

void BM_interior_point_main(benchmark::State& state) {
  const Dataset x = gaussian_data(static_cast<std::size_t>(state.range(0)));
  Rng rng(13);
  for (auto _ : state) {
    benchmark::DoNotOptimize(interior_point_main(x, kBudget, 2.0, relaxed_profile(), rng));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_interior_point_main)->Arg(1'000'000);

void BM_private_median(benchmark::State& state) {
  const Dataset x = gaussian_data(static_cast<std::size_t>(state.range(0)));
  Rng rng(17);
  for (auto _ : state) {
    benchmark::DoNotOptimize(private_median(x, kBudget, 0.1, 2.0, relaxed_profile(), rng));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_private_median)->Arg(1'000'000);

}  // namespace

BENCHMARK_MAIN();
