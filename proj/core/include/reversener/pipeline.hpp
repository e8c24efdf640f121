#pragma once

#include <cstdint>
#include <string>

#include "reversener/llm.hpp"

namespace reversener {

/// Full run configuration. Loadable from a JSON document; every field is
/// overridable by a CLI flag of the same name (flag wins).
struct RunConfig {
  std::string corpus;
  std::string format = "jsonl";  // jsonl | conll
  std::string conll_separator = " ";
  bool spaced = true;
  std::string types;  // inline JSON array or a file path

  int clusters = 10;
  int per_cluster = 3;
  int top_k = 5;
  std::string sc = "none";  // none | entity | response
  int attempts = 5;
  double temperature = 0.8;
  std::uint64_t seed = 0;
  int words_per_type = 6;
  bool vocab_per_cluster = true;
  int max_iter = 100;

  std::string model = "gpt-4o-mini";
  int max_tokens = 1024;
  std::string llm_endpoint;
  std::string llm_replay;

  std::string embed_provider = "hash";  // hash | remote | replay
  std::string embed_endpoint;
  std::string embed_model;
  int embed_dim = 64;
  std::string embed_cache;

  std::string out = "out";
  bool audit = false;

  std::string library;      // recognize / evaluate input
  std::string predictions;  // evaluate input
};

RunConfig load_run_config(const std::string& json_path);
std::string config_hash(const RunConfig& cfg);

/// Pipeline commands; each returns a process exit code and prints the failing
/// stage on error. `injected` substitutes the LLM backend (used by fixture
/// tooling); when null the backend comes from the config.
int cmd_build_library(const RunConfig& cfg, LlmClient* injected = nullptr);
int cmd_recognize(const RunConfig& cfg, LlmClient* injected = nullptr);
int cmd_evaluate(const RunConfig& cfg);
int cmd_pipeline(const RunConfig& cfg, LlmClient* injected = nullptr);
int cmd_isolated(const RunConfig& cfg, LlmClient* injected = nullptr);
int cmd_sweep(const RunConfig& cfg, const std::string& grid, int repeats,
              LlmClient* injected = nullptr);

}  // namespace reversener
