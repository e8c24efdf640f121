#include "reversener/selector.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace reversener {

SimilarityMatrix similarity_matrix(
    const std::vector<EmbeddingVector>& task_vecs,
    const std::vector<EmbeddingVector>& lib_vecs) {
  SimilarityMatrix m;
  m.rows = task_vecs.size();
  m.cols = lib_vecs.size();
  m.values.resize(m.rows * m.cols);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j)
      m.values[i * m.cols + j] = cosine_similarity(task_vecs[i], lib_vecs[j]);
  return m;
}

SelectionResult select_top_k(const SimilarityMatrix& matrix, int k) {
  if (k < 1) throw std::invalid_argument("select_top_k: k must be >= 1");
  SelectionResult result;
  result.per_sentence.resize(matrix.rows);
  const std::size_t keep = std::min<std::size_t>(k, matrix.cols);
  for (std::size_t i = 0; i < matrix.rows; ++i) {
    std::vector<int> order(matrix.cols);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return matrix.at(i, a) > matrix.at(i, b);
    });
    order.resize(keep);
    result.per_sentence[i] = std::move(order);
  }
  return result;
}

}  // namespace reversener
