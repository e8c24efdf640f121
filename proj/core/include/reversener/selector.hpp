#pragma once

#include <cstddef>
#include <vector>

#include "reversener/embedder.hpp"

namespace reversener {

/// Dense task x library cosine-similarity grid, row-major.
struct SimilarityMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
};

struct SelectionResult {
  // Per task sentence: min(K, N_E) library indices, descending similarity.
  std::vector<std::vector<int>> per_sentence;
};

SimilarityMatrix similarity_matrix(const std::vector<EmbeddingVector>& task_vecs,
                                   const std::vector<EmbeddingVector>& lib_vecs);

/// Per row, the k column indices of largest similarity in descending order.
/// Ties break to the lowest column index; k past N_E returns all columns.
SelectionResult select_top_k(const SimilarityMatrix& matrix, int k);

}  // namespace reversener
