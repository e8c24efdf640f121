#include <random>

#include "doctest.h"
#include "reversener/clusterer.hpp"

using namespace reversener;

namespace {

std::vector<EmbeddingVector> random_vectors(int n, int d, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> dist;
  std::vector<EmbeddingVector> vecs(n, EmbeddingVector(d));
  for (auto& v : vecs)
    for (auto& x : v) x = dist(rng);
  return vecs;
}

// Exhaustive k=1 oracle: the point maximizing summed similarity to all points.
int best_single_medoid(const std::vector<EmbeddingVector>& vecs) {
  int best = -1;
  double best_sum = -1e300;
  for (size_t c = 0; c < vecs.size(); ++c) {
    double sum = 0;
    for (const auto& v : vecs) sum += cosine_similarity(vecs[c], v);
    if (sum > best_sum) {
      best_sum = sum;
      best = static_cast<int>(c);
    }
  }
  return best;
}

}  // namespace

TEST_CASE("kmedoids rejects bad k") {
  auto vecs = random_vectors(4, 3, 1);
  CHECK_THROWS(kmedoids(vecs, 0, 0));
  CHECK_THROWS(kmedoids(vecs, 5, 0));
}

TEST_CASE("k equals N: every point its own medoid, objective N") {
  auto vecs = random_vectors(6, 4, 2);
  auto c = kmedoids(vecs, 6, 99);
  CHECK(c.medoid_ids.size() == 6);
  CHECK(c.objective == doctest::Approx(6.0));
  CHECK(c.iterations_run == 1);
  for (const auto& [point, medoid] : c.assignment)
    CHECK(c.medoid_ids[medoid] == point);
}

TEST_CASE("k=1 equals the exhaustive-search medoid") {
  for (unsigned seed = 0; seed < 20; ++seed) {
    auto vecs = random_vectors(2 + seed % 7, 4, seed);
    auto c = kmedoids(vecs, 1, seed);
    CHECK(c.medoid_ids.front() == best_single_medoid(vecs));
  }
}

TEST_CASE("two well-separated bundles split 4/4") {
  // Two orthogonal directions, tiny jitter within each bundle.
  std::vector<EmbeddingVector> vecs;
  for (int i = 0; i < 4; ++i)
    vecs.push_back({1.0, 1e-4 * i, 0.0, 0.0});
  for (int i = 0; i < 4; ++i)
    vecs.push_back({0.0, 0.0, 1.0, 1e-4 * i});
  auto c = kmedoids(vecs, 2, 3);
  REQUIRE(c.medoid_ids.size() == 2);
  bool one_low = c.medoid_ids[0] < 4, two_low = c.medoid_ids[1] < 4;
  CHECK(one_low != two_low);  // one medoid per bundle
  int low = 0, high = 0;
  for (const auto& [point, medoid] : c.assignment)
    ((c.medoid_ids[medoid] < 4) ? low : high)++;
  CHECK(low == 4);
  CHECK(high == 4);

  // brute force over all medoid pairs
  double best = -1e300;
  std::vector<int> best_pair;
  for (int a = 0; a < 8; ++a)
    for (int b = a + 1; b < 8; ++b) {
      double obj = 0;
      for (const auto& v : vecs)
        obj += std::max(cosine_similarity(v, vecs[a]),
                        cosine_similarity(v, vecs[b]));
      if (obj > best) {
        best = obj;
        best_pair = {a, b};
      }
    }
  CHECK(c.objective == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("objective history is non-decreasing") {
  for (unsigned seed = 0; seed < 30; ++seed) {
    auto vecs = random_vectors(16 + seed % 17, 6, 100 + seed);
    auto c = kmedoids(vecs, 1 + seed % 5, seed);
    for (size_t i = 1; i < c.objective_history.size(); ++i)
      CHECK(c.objective_history[i] >= c.objective_history[i - 1] - 1e-12);
  }
}

TEST_CASE("determinism: identical inputs give identical clusterings") {
  auto vecs = random_vectors(40, 8, 9);
  auto a = kmedoids(vecs, 5, 1234);
  auto b = kmedoids(vecs, 5, 1234);
  CHECK(a.medoid_ids == b.medoid_ids);
  CHECK(a.assignment == b.assignment);
  CHECK(a.objective == b.objective);
  CHECK(a.iterations_run == b.iterations_run);
  CHECK(a.objective_history == b.objective_history);
}

TEST_CASE("local optimality of medoids at convergence") {
  auto vecs = random_vectors(24, 5, 77);
  auto c = kmedoids(vecs, 4, 42);
  for (size_t j = 0; j < c.medoid_ids.size(); ++j) {
    std::vector<int> members;
    for (const auto& [point, medoid] : c.assignment)
      if (medoid == static_cast<int>(j)) members.push_back(point);
    auto cluster_sum = [&](int cand) {
      double sum = 0;
      for (int m : members) sum += cosine_similarity(vecs[cand], vecs[m]);
      return sum;
    };
    double chosen = cluster_sum(c.medoid_ids[j]);
    for (int m : members)
      CHECK(cluster_sum(m) <= chosen + 1e-12);
  }
}

TEST_CASE("medoids are actual data points, assignment is total") {
  auto vecs = random_vectors(15, 4, 3);
  auto c = kmedoids(vecs, 3, 8);
  for (int id : c.medoid_ids) {
    CHECK(id >= 0);
    CHECK(id < 15);
  }
  CHECK(c.assignment.size() == 15);
}

TEST_CASE("feature_sentences returns medoid sentences in medoid order") {
  TaskSet task;
  task.sentences = {{0, "alpha"}, {1, "beta"}, {2, "gamma"}};
  Clustering c;
  c.medoid_ids = {2, 0};
  auto feats = feature_sentences(c, task);
  REQUIRE(feats.size() == 2);
  CHECK(feats[0].text == "gamma");
  CHECK(feats[1].text == "alpha");
}

TEST_CASE("isolated reduction: single sentence, k=1") {
  TaskSet task;
  task.sentences = {{0, "only one"}};
  auto c = kmedoids({{1.0, 0.5}}, 1, 0);
  auto feats = feature_sentences(c, task);
  REQUIRE(feats.size() == 1);
  CHECK(feats[0].text == "only one");
}
