#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "reversener/clusterer.hpp"
#include "reversener/embedder.hpp"
#include "reversener/recognizer.hpp"
#include "reversener/selector.hpp"

namespace {

using reversener::EmbeddingVector;

std::vector<EmbeddingVector> random_vectors(int n, int d, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> dist;
  std::vector<EmbeddingVector> vecs(n, EmbeddingVector(d));
  for (auto& v : vecs)
    for (auto& x : v) x = dist(rng);
  return vecs;
}

void BM_HashEmbed(benchmark::State& state) {
  reversener::EmbeddingProviderConfig cfg;
  cfg.dimension = 64;
  reversener::EmbeddingProvider provider(cfg);
  std::vector<std::string> texts;
  for (int i = 0; i < 64; ++i)
    texts.push_back("The quick brown fox jumps over sentence number " +
                    std::to_string(i) + " in the benchmark corpus.");
  for (auto _ : state) {
    auto vecs = provider.embed_batch(texts);
    benchmark::DoNotOptimize(vecs);
  }
}
BENCHMARK(BM_HashEmbed);

void BM_KMedoids(benchmark::State& state) {
  auto vecs = random_vectors(static_cast<int>(state.range(0)), 64, 7);
  for (auto _ : state) {
    auto clustering = reversener::kmedoids(vecs, 10, 42);
    benchmark::DoNotOptimize(clustering);
  }
}
BENCHMARK(BM_KMedoids)->Arg(128)->Arg(512);

void BM_SimilarityMatrix(benchmark::State& state) {
  auto task = random_vectors(static_cast<int>(state.range(0)), 64, 11);
  auto lib = random_vectors(30, 64, 13);
  for (auto _ : state) {
    auto m = reversener::similarity_matrix(task, lib);
    benchmark::DoNotOptimize(m);
  }
}
BENCHMARK(BM_SimilarityMatrix)->Arg(256)->Arg(1024);

void BM_SelectTopK(benchmark::State& state) {
  auto task = random_vectors(1024, 64, 17);
  auto lib = random_vectors(30, 64, 19);
  auto m = reversener::similarity_matrix(task, lib);
  for (auto _ : state) {
    auto sel = reversener::select_top_k(m, 5);
    benchmark::DoNotOptimize(sel);
  }
}
BENCHMARK(BM_SelectTopK);

void BM_EntityScVote(benchmark::State& state) {
  reversener::InferenceRecord record;
  std::mt19937 rng(23);
  for (int i = 0; i < 5; ++i) {
    reversener::InferenceAttempt at;
    at.attempt_index = i;
    at.parse_ok = true;
    for (int e = 0; e < 6; ++e)
      if (rng() % 2)
        at.entities.push_back({"entity" + std::to_string(e), "PER"});
    record.attempts.push_back(at);
  }
  for (auto _ : state) {
    reversener::entity_sc_vote(record);
    benchmark::DoNotOptimize(record.chosen);
  }
}
BENCHMARK(BM_EntityScVote);

}  // namespace

BENCHMARK_MAIN();
