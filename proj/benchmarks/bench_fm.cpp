#include <benchmark/benchmark.h>

#include <random>

#include "mohin/fm.hpp"

namespace {

mohin::FmModel random_model(std::size_t d, std::size_t k, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 0.1);
  mohin::FmModel m;
  m.w0 = g(rng);
  m.w.resize(d);
  for (auto& x : m.w) x = g(rng);
  m.v = mohin::DenseMatrix(d, k);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t f = 0; f < k; ++f) m.v(i, f) = g(rng);
  }
  return m;
}

void BM_FmPredict(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const auto d = static_cast<std::size_t>(state.range(0));
  const auto model = random_model(d, 10, rng);
  std::vector<double> x(d);
  std::normal_distribution<double> g(0.0, 1.0);
  for (auto& v : x) v = g(rng);
  for (auto _ : state) benchmark::DoNotOptimize(mohin::fm_predict(model, x));
}
BENCHMARK(BM_FmPredict)->Arg(40)->Arg(200)->Arg(1000);

void BM_FmEpoch(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 0.1);
  std::vector<mohin::FmSample> samples(static_cast<std::size_t>(state.range(0)));
  for (auto& s : samples) {
    s.features.x.resize(40);
    for (auto& v : s.features.x) v = g(rng);
    s.rating = 3.0 + 10.0 * g(rng);
  }
  mohin::FmConfig cfg;
  cfg.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(mohin::fm_train(samples, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FmEpoch)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
