#include <benchmark/benchmark.h>

#include <random>

#include "mohin/sparse_matrix.hpp"

namespace {

mohin::SparseMatrix random_sparse(std::size_t n, double density, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<mohin::Triplet> t;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (coin(rng) < density) t.push_back({mohin::Index(i), mohin::Index(j), 1.0});
    }
  }
  return mohin::SparseMatrix::from_triplets(n, n, std::move(t));
}

void BM_Spmm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_sparse(n, 8.0 / double(n), 1);
  const auto b = random_sparse(n, 8.0 / double(n), 2);
  for (auto _ : state) benchmark::DoNotOptimize(mohin::spmm(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Spmm)->RangeMultiplier(4)->Range(256, 16384)->Complexity();

void BM_MaskedSpmm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_sparse(n, 8.0 / double(n), 1);
  const auto mask = random_sparse(n, 8.0 / double(n), 3);
  for (auto _ : state) benchmark::DoNotOptimize(mohin::masked_spmm(a, a, mask));
}
BENCHMARK(BM_MaskedSpmm)->RangeMultiplier(4)->Range(256, 16384);

void BM_Transpose(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_sparse(n, 8.0 / double(n), 1);
  for (auto _ : state) benchmark::DoNotOptimize(mohin::transpose(a));
}
BENCHMARK(BM_Transpose)->RangeMultiplier(4)->Range(256, 16384);

}  // namespace

BENCHMARK_MAIN();
