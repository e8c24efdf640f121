#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "reversener/pipeline.hpp"

using reversener::RunConfig;

namespace {

void add_common_flags(CLI::App* cmd, RunConfig& cfg, std::string& config_path) {
  cmd->add_option("--config", config_path, "JSON config file; flags override");
  cmd->add_option("--corpus", cfg.corpus, "task corpus file");
  cmd->add_option("--format", cfg.format, "corpus format: conll or jsonl")
      ->check(CLI::IsMember({"conll", "jsonl"}));
  cmd->add_option("--separator", cfg.conll_separator,
                  "CoNLL column separator (default space)");
  cmd->add_flag("!--non-spaced", cfg.spaced,
                "join tokens without spaces (e.g. Chinese)");
  cmd->add_option("--types", cfg.types,
                  "entity type definitions: JSON array or file path");
  cmd->add_option("--clusters", cfg.clusters, "number of clusters");
  cmd->add_option("--per-cluster", cfg.per_cluster,
                  "generated examples per cluster");
  cmd->add_option("--top-k", cfg.top_k, "examples per prompt");
  cmd->add_option("--sc", cfg.sc, "self-consistency mode")
      ->check(CLI::IsMember({"none", "entity", "response"}));
  cmd->add_option("--attempts", cfg.attempts, "inference attempts under SC");
  cmd->add_option("--temperature", cfg.temperature, "sampling temperature");
  cmd->add_option("--seed", cfg.seed, "clustering RNG seed");
  cmd->add_option("--words-per-type", cfg.words_per_type,
                  "vocabulary words requested per type");
  cmd->add_flag("--vocab-per-cluster,!--single-vocab", cfg.vocab_per_cluster,
                "one vocabulary call per cluster (default) vs one per run");
  cmd->add_option("--model", cfg.model, "LLM model name");
  cmd->add_option("--max-tokens", cfg.max_tokens, "completion token limit");
  cmd->add_option("--llm-endpoint", cfg.llm_endpoint,
                  "chat-completions endpoint URL");
  cmd->add_option("--llm-replay", cfg.llm_replay, "replay tape path");
  cmd->add_option("--embed-provider", cfg.embed_provider,
                  "embedding provider: hash, remote or replay")
      ->check(CLI::IsMember({"hash", "remote", "replay"}));
  cmd->add_option("--embed-endpoint", cfg.embed_endpoint,
                  "embedding endpoint URL");
  cmd->add_option("--embed-model", cfg.embed_model, "embedding model name");
  cmd->add_option("--embed-dim", cfg.embed_dim, "embedding dimension");
  cmd->add_option("--embed-cache", cfg.embed_cache, "embedding cache file");
  cmd->add_option("--out", cfg.out, "output directory");
  cmd->add_flag("--audit", cfg.audit,
                "include all attempts in the predictions file");
}

// Re-parses so that an explicit flag beats the config file value.
RunConfig effective_config(CLI::App* cmd, const RunConfig& parsed,
                           const std::string& config_path) {
  if (config_path.empty()) return parsed;
  RunConfig cfg = reversener::load_run_config(config_path);
  auto keep = [&](const char* flag, auto member) {
    auto* opt = cmd->get_option_no_throw(flag);
    if (opt && opt->count() > 0) cfg.*member = parsed.*member;
  };
  keep("--corpus", &RunConfig::corpus);
  keep("--format", &RunConfig::format);
  keep("--separator", &RunConfig::conll_separator);
  keep("--non-spaced", &RunConfig::spaced);
  keep("--types", &RunConfig::types);
  keep("--clusters", &RunConfig::clusters);
  keep("--per-cluster", &RunConfig::per_cluster);
  keep("--top-k", &RunConfig::top_k);
  keep("--sc", &RunConfig::sc);
  keep("--attempts", &RunConfig::attempts);
  keep("--temperature", &RunConfig::temperature);
  keep("--seed", &RunConfig::seed);
  keep("--words-per-type", &RunConfig::words_per_type);
  keep("--vocab-per-cluster", &RunConfig::vocab_per_cluster);
  keep("--model", &RunConfig::model);
  keep("--max-tokens", &RunConfig::max_tokens);
  keep("--llm-endpoint", &RunConfig::llm_endpoint);
  keep("--llm-replay", &RunConfig::llm_replay);
  keep("--embed-provider", &RunConfig::embed_provider);
  keep("--embed-endpoint", &RunConfig::embed_endpoint);
  keep("--embed-model", &RunConfig::embed_model);
  keep("--embed-dim", &RunConfig::embed_dim);
  keep("--embed-cache", &RunConfig::embed_cache);
  keep("--out", &RunConfig::out);
  keep("--audit", &RunConfig::audit);
  keep("--library", &RunConfig::library);
  keep("--predictions", &RunConfig::predictions);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ReverseNER: zero-shot NER via a reversed example library"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_path;
  std::string grid = "10x3";
  int repeats = 3;

  auto* build = app.add_subcommand("build-library",
                                   "cluster the task set and build the "
                                   "entity-labeled example library");
  auto* recognize =
      app.add_subcommand("recognize", "run example-driven inference");
  auto* evaluate =
      app.add_subcommand("evaluate", "score predictions against gold");
  auto* pipeline = app.add_subcommand(
      "pipeline", "build-library, recognize and evaluate in one run");
  auto* isolated = app.add_subcommand(
      "isolated", "per-sentence run: each sentence gets its own tiny library");
  auto* sweep = app.add_subcommand(
      "sweep", "grid over (clusters, per-cluster), CSV of mean/std micro F1");

  for (auto* cmd : {build, recognize, evaluate, pipeline, isolated, sweep})
    add_common_flags(cmd, cfg, config_path);
  for (auto* cmd : {recognize, evaluate})
    cmd->add_option("--library", cfg.library, "library file");
  evaluate->add_option("--predictions", cfg.predictions, "predictions file");
  sweep->add_option("--grid", grid, "combos as CxP, comma separated");
  sweep->add_option("--repeats", repeats, "seeded repetitions per combo");

  CLI11_PARSE(app, argc, argv);

  try {
    auto* cmd = app.get_subcommands().front();
    RunConfig final_cfg = effective_config(cmd, cfg, config_path);
    if (cmd == build) return reversener::cmd_build_library(final_cfg);
    if (cmd == recognize) return reversener::cmd_recognize(final_cfg);
    if (cmd == evaluate) return reversener::cmd_evaluate(final_cfg);
    if (cmd == pipeline) return reversener::cmd_pipeline(final_cfg);
    if (cmd == isolated) return reversener::cmd_isolated(final_cfg);
    if (cmd == sweep) return reversener::cmd_sweep(final_cfg, grid, repeats);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
