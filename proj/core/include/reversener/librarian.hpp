#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "reversener/clusterer.hpp"
#include "reversener/corpus.hpp"
#include "reversener/embedder.hpp"
#include "reversener/llm.hpp"

namespace reversener {

/// Label -> generated entity strings, trimmed and deduplicated per label.
struct EntityVocabulary {
  std::map<std::string, std::vector<std::string>> words;
};

struct ExampleLibrary {
  std::vector<LabeledExample> examples;
  // Per example: (cluster index, feature-sentence id).
  std::vector<std::pair<int, int>> provenance;
  std::vector<EmbeddingVector> embeddings;  // aligned with examples

  std::uint64_t seed = 0;
  std::string config_hash;
  std::string embed_provider_id;
  std::string llm_model;
};

struct LlmCallOptions {
  std::string model_name;
  double temperature = 0.8;
  int max_tokens = 1024;
  int parse_retry = 2;
};

struct LibraryBuildOptions {
  int clusters = 10;
  int per_cluster = 3;
  int words_per_type = 6;
  bool vocab_per_cluster = true;
  std::uint64_t seed = 0;
  int max_iter = 100;
  std::string config_hash;
  LlmCallOptions llm;
};

/// Renders the vocabulary prompt, parses the JSON-object response and
/// validates its keys against the configured labels. Malformed responses are
/// retried up to parse_retry extra completions.
EntityVocabulary generate_vocabulary(const std::vector<EntityTypeDef>& types,
                                     int words_per_type, LlmClient& llm,
                                     const LlmCallOptions& opts);

/// Expands the vocabulary into n sentences mimicking the feature sentence.
/// Parsed examples failing the substring or label rule are dropped with a
/// diagnostic; one retry completion is issued if fewer than n survive.
std::vector<LabeledExample> expand_cluster(
    const EntityVocabulary& vocab, const Sentence& feature, int n,
    const std::vector<EntityTypeDef>& types, LlmClient& llm,
    const LlmCallOptions& opts);

ExampleLibrary build_library(const TaskSet& task,
                             const LibraryBuildOptions& opts,
                             const std::vector<EntityTypeDef>& types,
                             LlmClient& llm, EmbeddingProvider& embedder);

void save_library(const ExampleLibrary& lib, const std::string& path);
ExampleLibrary load_library(const std::string& path,
                            EmbeddingProvider& embedder);

/// Prompt-building blocks shared with tests and the recognizer.
std::string definitions_block(const std::vector<EntityTypeDef>& types);
std::string entity_type_set_block(const std::vector<EntityTypeDef>& types);
std::string vocab_structure_example(const std::vector<EntityTypeDef>& types);
std::string vocab_words_block(const EntityVocabulary& vocab);

}  // namespace reversener
