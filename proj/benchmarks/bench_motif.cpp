#include <benchmark/benchmark.h>

#include <random>

#include "mohin/motif.hpp"

namespace {

mohin::SparseMatrix random_digraph(std::size_t n, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<mohin::Triplet> t;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && coin(rng) < p) t.push_back({mohin::Index(i), mohin::Index(j), 1.0});
    }
  }
  return mohin::SparseMatrix::from_triplets(n, n, std::move(t));
}

void BM_ClosedForm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto m = static_cast<mohin::MotifId>(state.range(1));
  const auto a = random_digraph(n, 10.0 / double(n), 5);
  for (auto _ : state) benchmark::DoNotOptimize(mohin::motif_adjacency(a, m));
}
BENCHMARK(BM_ClosedForm)
    ->ArgsProduct({{64, 1024, 8192}, {0, 4, 5}})
    ->ArgNames({"n", "motif"});

void BM_BruteForce(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_digraph(n, 10.0 / double(n), 5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mohin::motif_adjacency_bruteforce(a, mohin::MotifId::kM6));
  }
}
BENCHMARK(BM_BruteForce)->Arg(32)->Arg(64)->Arg(128);

}  // namespace

BENCHMARK_MAIN();
