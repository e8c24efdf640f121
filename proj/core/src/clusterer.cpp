#include "reversener/clusterer.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace reversener {

namespace {

double dot(const EmbeddingVector& a, const EmbeddingVector& b) {
  double d = 0;
  for (size_t i = 0; i < a.size(); ++i) d += a[i] * b[i];
  return std::clamp(d, -1.0, 1.0);
}

}  // namespace

Clustering kmedoids(const std::vector<EmbeddingVector>& vectors, int k,
                    std::uint64_t seed, int max_iter) {
  const int n = static_cast<int>(vectors.size());
  if (n < 1) throw std::invalid_argument("kmedoids: no input vectors");
  if (k < 1) throw std::invalid_argument("kmedoids: k must be positive");
  if (k > n)
    throw std::invalid_argument("kmedoids: k=" + std::to_string(k) +
                                " exceeds N=" + std::to_string(n));
  if (max_iter < 1) throw std::invalid_argument("kmedoids: max_iter < 1");

  // Pre-normalize so cosine similarity reduces to a dot product.
  std::vector<EmbeddingVector> unit(vectors);
  for (auto& v : unit) {
    if (v.size() != vectors.front().size())
      throw std::invalid_argument("kmedoids: mixed dimensions");
    double norm = 0;
    for (double x : v) norm += x * x;
    if (norm == 0) throw std::invalid_argument("kmedoids: zero-norm vector");
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
  }

  // Uniform sampling without replacement via partial Fisher-Yates. The modulo
  // draw keeps the sequence identical across standard library versions.
  std::mt19937_64 rng(seed);
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  std::vector<int> medoids(k);
  for (int i = 0; i < k; ++i) {
    int j = i + static_cast<int>(rng() % static_cast<std::uint64_t>(n - i));
    std::swap(idx[i], idx[j]);
    medoids[i] = idx[i];
  }

  Clustering result;
  result.seed = seed;

  std::vector<int> assign(n, -1);
  auto is_medoid_of = [&](int point) {
    for (int j = 0; j < k; ++j)
      if (medoids[j] == point) return j;
    return -1;
  };

  auto assign_all = [&]() {
    for (int i = 0; i < n; ++i) {
      int self = is_medoid_of(i);
      if (self >= 0) {
        assign[i] = self;
        continue;
      }
      int best = 0;
      double best_sim = dot(unit[i], unit[medoids[0]]);
      for (int j = 1; j < k; ++j) {
        double s = dot(unit[i], unit[medoids[j]]);
        if (s > best_sim) {
          best_sim = s;
          best = j;
        }
      }
      assign[i] = best;
    }
    // An emptied cluster is reseeded to the worst-assigned point. Unreachable
    // while every medoid self-assigns, but kept as the repair rule.
    for (int j = 0; j < k; ++j) {
      bool empty = std::none_of(assign.begin(), assign.end(),
                                [j](int a) { return a == j; });
      if (!empty) continue;
      int worst = -1;
      double worst_sim = 2.0;
      for (int i = 0; i < n; ++i) {
        if (is_medoid_of(i) >= 0) continue;
        double s = dot(unit[i], unit[medoids[assign[i]]]);
        if (s < worst_sim) {
          worst_sim = s;
          worst = i;
        }
      }
      if (worst >= 0) {
        medoids[j] = worst;
        assign[worst] = j;
      }
    }
  };

  auto objective_of = [&]() {
    double obj = 0;
    for (int i = 0; i < n; ++i) obj += dot(unit[i], unit[medoids[assign[i]]]);
    return obj;
  };

  for (int iter = 0; iter < max_iter; ++iter) {
    assign_all();

    // Medoid update: per cluster, the member maximizing summed similarity to
    // the cluster. Ties break to the lowest member index.
    std::vector<int> next(medoids);
    for (int j = 0; j < k; ++j) {
      std::vector<int> members;
      for (int i = 0; i < n; ++i)
        if (assign[i] == j) members.push_back(i);
      int best = -1;
      double best_sum = -1e300;
      for (int cand : members) {
        double sum = 0;
        for (int m : members) sum += dot(unit[cand], unit[m]);
        if (sum > best_sum) {
          best_sum = sum;
          best = cand;
        }
      }
      if (best >= 0) next[j] = best;
    }

    bool changed = false;
    {
      std::vector<int> a(medoids), b(next);
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      changed = (a != b);
    }
    medoids = next;
    assign_all();
    result.iterations_run = iter + 1;
    result.objective_history.push_back(objective_of());
    if (!changed) break;
  }

  result.medoid_ids = medoids;
  for (int i = 0; i < n; ++i) result.assignment[i] = assign[i];
  result.objective = objective_of();
  return result;
}

std::vector<Sentence> feature_sentences(const Clustering& clustering,
                                        const TaskSet& task) {
  std::vector<Sentence> out;
  out.reserve(clustering.medoid_ids.size());
  for (int id : clustering.medoid_ids) {
    if (id < 0 || id >= static_cast<int>(task.sentences.size()))
      throw std::out_of_range("feature_sentences: medoid id out of range");
    out.push_back(task.sentences[id]);
  }
  return out;
}

}  // namespace reversener
