#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "reversener/corpus.hpp"
#include "reversener/embedder.hpp"
#include "reversener/librarian.hpp"

namespace reversener {

struct TypeScore {
  double precision = 0;  // 0..100
  double recall = 0;
  double f1 = 0;
  long tp = 0;
  long fp = 0;
  long fn = 0;
};

struct EvaluationReport {
  std::map<std::string, TypeScore> per_type;
  TypeScore overall;
  std::size_t n_sentences = 0;
  long total_gold = 0;
  long total_predicted = 0;
};

/// Exact (text, label) set matching per sentence, micro-aggregated. Values on
/// a 0-100 scale; zero-prediction precision is 0 by convention.
EvaluationReport micro_f1(const std::map<int, std::vector<EntityMention>>& pred,
                          const std::map<int, std::vector<EntityMention>>& gold,
                          std::size_t n_sentences);

/// Mean over task sentences of the best cosine match in the library.
double ahs(const std::vector<EmbeddingVector>& task_vecs,
           const std::vector<EmbeddingVector>& lib_vecs);

/// Mean pairwise (1 - cosine) over unique entity strings of one type.
/// Absent (nullopt) below 2 unique entities.
std::optional<double> entity_diversity(const std::vector<std::string>& entities,
                                       EmbeddingProvider& embedder);

struct LibraryQualityReport {
  double ahs = 0;
  std::map<std::string, double> ed_library;
  std::map<std::string, double> ed_task;
  std::map<std::string, double> edr;
  std::vector<std::string> skipped_types;  // below 2 unique entities on a side
};

LibraryQualityReport library_quality(const ExampleLibrary& library,
                                     const TaskSet& task,
                                     const std::vector<EmbeddingVector>& task_vecs,
                                     EmbeddingProvider& embedder);

std::string report_table(const EvaluationReport& report);

}  // namespace reversener
