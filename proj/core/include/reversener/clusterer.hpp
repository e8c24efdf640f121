#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "reversener/corpus.hpp"
#include "reversener/embedder.hpp"

namespace reversener {

struct Clustering {
  std::vector<int> medoid_ids;    // k distinct input indices
  std::map<int, int> assignment;  // input index -> medoid index
  double objective = 0.0;         // sum of sim(point, assigned medoid)
  int iterations_run = 0;
  std::uint64_t seed = 0;
  std::vector<double> objective_history;  // objective after each iteration
};

/// k-Medoids under cosine similarity. Medoids are initialized by uniform
/// sampling without replacement from the seeded RNG, then assignment and
/// medoid-update steps alternate until the medoid set is stable or max_iter
/// is reached. All argmax ties break to the lowest index; an emptied cluster
/// is reseeded to the currently worst-assigned point. Deterministic for a
/// given (vectors, k, seed, max_iter).
Clustering kmedoids(const std::vector<EmbeddingVector>& vectors, int k,
                    std::uint64_t seed, int max_iter = 100);

/// The k medoid sentences in medoid-index order.
std::vector<Sentence> feature_sentences(const Clustering& clustering,
                                        const TaskSet& task);

}  // namespace reversener
