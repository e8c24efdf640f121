#include <cstdio>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "fake_llm.hpp"
#include "reversener/librarian.hpp"

using namespace reversener;
using reversener::testing::ScriptedClient;

namespace {

std::vector<EntityTypeDef> toy_types() {
  return load_type_defs(std::string(TEST_DATA_DIR) + "/toy_types.json");
}

LlmCallOptions call_opts() {
  LlmCallOptions o;
  o.model_name = "fake";
  return o;
}

// Responds with queued strings in order; repeats the last one when exhausted.
ScriptedClient queued(std::vector<std::string> responses) {
  auto state = std::make_shared<std::pair<std::vector<std::string>, size_t>>(
      std::move(responses), 0);
  return ScriptedClient([state](const LlmRequest&) {
    auto& [items, cursor] = *state;
    if (cursor < items.size()) return items[cursor++];
    return items.back();
  });
}

}  // namespace

TEST_CASE("generate_vocabulary parses a plain JSON object") {
  auto types = toy_types();
  auto client = queued(
      {R"({"PER": ["Ada Lovelace", "John Smith"],
           "LOC": ["Paris"],
           "ORG": ["NASA", "Red Cross"]})"});
  auto vocab = generate_vocabulary(types, 2, client, call_opts());
  CHECK(vocab.words.at("PER") ==
        std::vector<std::string>{"Ada Lovelace", "John Smith"});
  CHECK(vocab.words.at("LOC") == std::vector<std::string>{"Paris"});
  CHECK(vocab.words.at("ORG").size() == 2);
  CHECK(client.invocations() == 1);
}

TEST_CASE("generate_vocabulary strips code fences and prose") {
  auto types = toy_types();
  auto client = queued(
      {"Sure, here you go:\n```json\n"
       R"({"PER": ["Ada"], "LOC": ["Paris"], "ORG": ["NASA"]})"
       "\n```\nHope that helps."});
  auto vocab = generate_vocabulary(types, 1, client, call_opts());
  CHECK(vocab.words.at("PER") == std::vector<std::string>{"Ada"});
}

TEST_CASE("generate_vocabulary dedupes and trims words per label") {
  auto types = toy_types();
  auto client = queued(
      {R"({"PER": [" Ada ", "Ada", "Bo"], "LOC": ["Rome"], "ORG": ["UN"]})"});
  auto vocab = generate_vocabulary(types, 2, client, call_opts());
  CHECK(vocab.words.at("PER") == std::vector<std::string>{"Ada", "Bo"});
}

TEST_CASE("generate_vocabulary retries on malformed responses") {
  auto types = toy_types();
  SUBCASE("second completion succeeds after junk") {
    auto client = queued(
        {"not json at all",
         R"({"PER": ["Ada"], "LOC": ["Paris"], "ORG": ["NASA"]})"});
    auto vocab = generate_vocabulary(types, 1, client, call_opts());
    CHECK(vocab.words.at("ORG") == std::vector<std::string>{"NASA"});
    CHECK(client.invocations() == 2);
  }
  SUBCASE("missing label key counts as malformed") {
    auto client = queued(
        {R"({"PER": ["Ada"], "LOC": ["Paris"]})",
         R"({"PER": ["Ada"], "LOC": ["Paris"], "ORG": ["NASA"]})"});
    auto vocab = generate_vocabulary(types, 1, client, call_opts());
    CHECK(vocab.words.count("ORG") == 1);
  }
  SUBCASE("exhausting retries throws") {
    auto client = queued({"junk"});
    CHECK_THROWS(generate_vocabulary(types, 1, client, call_opts()));
    // 1 initial + parse_retry extra completions.
    CHECK(client.invocations() == 1 + call_opts().parse_retry);
  }
}

TEST_CASE("expand_cluster keeps only validated examples") {
  auto types = toy_types();
  EntityVocabulary vocab;
  vocab.words = {{"PER", {"Ada Lovelace"}},
                 {"LOC", {"Paris"}},
                 {"ORG", {"NASA"}}};
  Sentence feature{0, "A scientist travelled to a city."};

  SUBCASE("valid examples pass through with set-deduped mentions") {
    auto client = queued(
        {R"([{"text": "Ada Lovelace toured Paris.",
              "entities": [{"entity_text": "Ada Lovelace", "entity_label": "PER"},
                           {"entity_text": "Paris", "entity_label": "LOC"},
                           {"entity_text": "Paris", "entity_label": "LOC"}]},
             {"text": "NASA landed a probe.",
              "entities": [{"entity_text": "NASA", "entity_label": "ORG"}]}])"});
    auto out = expand_cluster(vocab, feature, 2, types, client, call_opts());
    REQUIRE(out.size() == 2);
    CHECK(out[0].sentence.text == "Ada Lovelace toured Paris.");
    CHECK(out[0].entities.size() == 2);  // duplicate Paris collapsed
    CHECK(out[1].entities.size() == 1);
  }

  SUBCASE("substring and label violations are dropped") {
    auto client = queued(
        {R"([{"text": "Ada visited Rome.",
              "entities": [{"entity_text": "Paris", "entity_label": "LOC"}]},
             {"text": "NASA launched.",
              "entities": [{"entity_text": "NASA", "entity_label": "AGENCY"}]},
             {"text": "Paris hosted Ada Lovelace.",
              "entities": [{"entity_text": "Paris", "entity_label": "LOC"}]}])"});
    auto out = expand_cluster(vocab, feature, 1, types, client, call_opts());
    REQUIRE(out.size() == 1);
    CHECK(out[0].sentence.text == "Paris hosted Ada Lovelace.");
  }

  SUBCASE("examples with no entities are dropped") {
    auto client = queued(
        {R"([{"text": "It rained all day.", "entities": []},
             {"text": "NASA grew.",
              "entities": [{"entity_text": "NASA", "entity_label": "ORG"}]}])"});
    auto out = expand_cluster(vocab, feature, 2, types, client, call_opts());
    REQUIRE(out.size() == 1);
    CHECK(out[0].sentence.text == "NASA grew.");
  }

  SUBCASE("retry tops up a short batch, dedup by text, truncate to n") {
    auto client = queued(
        {R"([{"text": "NASA grew.",
              "entities": [{"entity_text": "NASA", "entity_label": "ORG"}]}])",
         R"([{"text": "NASA grew.",
              "entities": [{"entity_text": "NASA", "entity_label": "ORG"}]},
             {"text": "Paris slept.",
              "entities": [{"entity_text": "Paris", "entity_label": "LOC"}]},
             {"text": "Ada Lovelace wrote.",
              "entities": [{"entity_text": "Ada Lovelace", "entity_label": "PER"}]}])"});
    auto out = expand_cluster(vocab, feature, 2, types, client, call_opts());
    REQUIRE(out.size() == 2);
    CHECK(out[0].sentence.text == "NASA grew.");
    CHECK(out[1].sentence.text == "Paris slept.");
    CHECK(client.invocations() == 2);
  }

  SUBCASE("zero valid examples after retry throws") {
    auto client = queued({"[]"});
    CHECK_THROWS(expand_cluster(vocab, feature, 2, types, client, call_opts()));
  }
}

TEST_CASE("build_library produces k*n examples with aligned metadata") {
  auto task = load_jsonl(std::string(TEST_DATA_DIR) + "/toy_corpus.jsonl");
  auto types = toy_types();
  EmbeddingProviderConfig ec;
  ec.kind = EmbedderKind::HashingFallback;
  ec.dimension = 32;
  EmbeddingProvider embedder(ec);

  LibraryBuildOptions opts;
  opts.clusters = 4;
  opts.per_cluster = 3;
  opts.seed = 7;
  opts.config_hash = "deadbeef";
  opts.llm.model_name = "fake";

  ScriptedClient client(reversener::testing::toy_responder);
  auto lib = build_library(task, opts, types, client, embedder);

  CHECK(lib.examples.size() == 12);
  CHECK(lib.provenance.size() == lib.examples.size());
  CHECK(lib.embeddings.size() == lib.examples.size());
  CHECK(lib.seed == 7);
  CHECK(lib.config_hash == "deadbeef");
  CHECK(lib.embed_provider_id == embedder.provider_id());
  CHECK(lib.llm_model == "fake");

  // Per-cluster vocabulary + one expansion per cluster.
  CHECK(client.invocations() == 4 + 4);

  // Provenance clusters are 0..k-1 in order, n examples each, and every
  // feature id is a real sentence id.
  std::map<int, int> per_cluster;
  for (auto& [cluster, feature_id] : lib.provenance) {
    per_cluster[cluster]++;
    CHECK(feature_id >= 0);
    CHECK(feature_id < static_cast<int>(task.sentences.size()));
  }
  REQUIRE(per_cluster.size() == 4);
  for (auto& [cluster, count] : per_cluster) CHECK(count == 3);

  // Every library mention obeys the substring and label rules.
  auto labels = type_labels(types);
  for (const auto& ex : lib.examples)
    CHECK(validate_mentions(ex.sentence.text, ex.entities, &labels).empty());

  SUBCASE("shared vocabulary mode issues one vocabulary call") {
    ScriptedClient client2(reversener::testing::toy_responder);
    auto opts2 = opts;
    opts2.vocab_per_cluster = false;
    auto lib2 = build_library(task, opts2, types, client2, embedder);
    CHECK(lib2.examples.size() == 12);
    CHECK(client2.invocations() == 1 + 4);
  }

  SUBCASE("identical seed and options reproduce the library exactly") {
    ScriptedClient client2(reversener::testing::toy_responder);
    auto lib2 = build_library(task, opts, types, client2, embedder);
    REQUIRE(lib2.examples.size() == lib.examples.size());
    for (size_t i = 0; i < lib.examples.size(); ++i) {
      CHECK(lib2.examples[i].sentence.text == lib.examples[i].sentence.text);
      CHECK(lib2.examples[i].entities == lib.examples[i].entities);
      CHECK(lib2.provenance[i] == lib.provenance[i]);
    }
  }

  SUBCASE("save and load round-trip") {
    std::string path = "librarian_roundtrip.json";
    save_library(lib, path);
    auto loaded = load_library(path, embedder);
    std::remove(path.c_str());
    REQUIRE(loaded.examples.size() == lib.examples.size());
    for (size_t i = 0; i < lib.examples.size(); ++i) {
      CHECK(loaded.examples[i].sentence.text == lib.examples[i].sentence.text);
      CHECK(loaded.examples[i].entities == lib.examples[i].entities);
    }
    CHECK(loaded.provenance == lib.provenance);
    CHECK(loaded.seed == lib.seed);
    CHECK(loaded.config_hash == lib.config_hash);
    CHECK(loaded.embed_provider_id == lib.embed_provider_id);
    CHECK(loaded.llm_model == lib.llm_model);
    REQUIRE(loaded.embeddings.size() == lib.embeddings.size());
    for (size_t i = 0; i < lib.embeddings.size(); ++i)
      CHECK(loaded.embeddings[i] == lib.embeddings[i]);
  }
}

TEST_CASE("prompt blocks render deterministic text") {
  auto types = toy_types();
  CHECK(entity_type_set_block(types) == "PER, LOC, ORG");
  auto defs = definitions_block(types);
  CHECK(defs.find("PER means person") != std::string::npos);
  CHECK(defs.find("cities") != std::string::npos);
  auto structure = vocab_structure_example(types);
  CHECK(structure.find("\"PER\"") != std::string::npos);
  EntityVocabulary vocab;
  vocab.words = {{"PER", {"Ada", "Bo"}}, {"LOC", {"Rome"}}};
  auto block = vocab_words_block(vocab);
  CHECK(block.find("Ada, Bo") != std::string::npos);
  CHECK(block.find("Rome") != std::string::npos);
}
