#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "reversener/librarian.hpp"
#include "reversener/llm.hpp"
#include "reversener/recognizer.hpp"

using namespace reversener;
namespace fs = std::filesystem;

namespace {

std::vector<EntityTypeDef> demo_types() {
  return {{"PER", "Person", "Denotes individual people."},
          {"LOC", "Location", "Refers to geographical entities."},
          {"ORG", "Organization", "Represents named groups of people."}};
}

}  // namespace

TEST_CASE("recognition prompt ends with the test-input tail") {
  LabeledExample ex;
  ex.sentence = {0, "John Smith and Marie Curie work for NASA in Paris."};
  ex.entities = {{"John Smith", "PER"}, {"NASA", "ORG"}};
  auto prompt = render(
      default_template(PromptKind::Recognition),
      {{"entity_type_set", entity_type_set_block(demo_types())},
       {"definitions", definitions_block(demo_types())},
       {"examples_block", examples_block({ex})},
       {"task_sentence",
        "Lily and Mark collaborate at the World Health Organization."}});
  CHECK(prompt.find("Test Input Sentence: Lily and Mark collaborate") !=
        std::string::npos);
  CHECK(prompt.rfind("Output:") == prompt.size() - 7);
  CHECK(prompt.find("Example 1: Input sentence: John Smith") !=
        std::string::npos);
}

TEST_CASE("vocabulary prompt contains the JSON structure example block") {
  auto types = demo_types();
  types.push_back({"MISC", "Miscellaneous", "Everything else."});
  auto prompt =
      render(default_template(PromptKind::Vocabulary),
             {{"entity_type_set", entity_type_set_block(types)},
              {"definitions", definitions_block(types)},
              {"words_per_type", "6"},
              {"vocab_block", vocab_structure_example(types)}});
  CHECK(prompt.find("\"MISC\": [\"MISC_1\", \"MISC_2\", \"MISC_3\"]") !=
        std::string::npos);
  CHECK(prompt.find("at least 6 diverse words") != std::string::npos);
}

TEST_CASE("empty required placeholder is an error") {
  CHECK_THROWS_WITH_AS(
      render(default_template(PromptKind::Recognition),
             {{"entity_type_set", "PER"},
              {"definitions", "PER means Person."},
              {"examples_block", ""},
              {"task_sentence", "x"}}),
      doctest::Contains("examples_block"), std::runtime_error);
}

TEST_CASE("unbound placeholder is an error naming it") {
  CHECK_THROWS_WITH_AS(
      render(default_template(PromptKind::Expansion),
             {{"entity_type_set", "PER"},
              {"sentences_per_cluster", "3"},
              {"vocab_block", "PER: John"}}),
      doctest::Contains("reference_sentence"), std::runtime_error);
}

TEST_CASE("replay key buckets temperature to 2 decimals") {
  LlmRequest a{"prompt", 0.8, "m", 256};
  LlmRequest b{"prompt", 0.8000001, "m", 256};
  LlmRequest c{"prompt", 0.81, "m", 256};
  CHECK(replay_key(a) == replay_key(b));
  CHECK(replay_key(a) != replay_key(c));
}

TEST_CASE("replay client: lookup, miss, and invocation counter") {
  auto tape = (fs::temp_directory_path() / "t_tape.jsonl").string();
  fs::remove(tape);
  LlmRequest req{"say hi", 0.8, "test-model", 128};
  append_replay_record(tape, req, "[]");

  LlmBackendConfig cfg;
  cfg.kind = LlmBackendKind::Replay;
  cfg.replay_path = tape;
  auto client = make_llm_client(cfg);
  CHECK(client->complete(req) == "[]");
  CHECK(client->invocations() == 1);

  LlmRequest missing{"different prompt", 0.8, "test-model", 128};
  CHECK_THROWS(client->complete(missing));
  CHECK(client->invocations() == 1);  // counter unchanged on a miss
}

TEST_CASE("replay client replays a recorded sequence for repeated requests") {
  auto tape = (fs::temp_directory_path() / "t_tape_seq.jsonl").string();
  fs::remove(tape);
  LlmRequest req{"same prompt", 0.8, "m", 128};
  append_replay_record(tape, req, "first");
  append_replay_record(tape, req, "second");

  LlmBackendConfig cfg;
  cfg.kind = LlmBackendKind::Replay;
  cfg.replay_path = tape;
  auto client = make_llm_client(cfg);
  CHECK(client->complete(req) == "first");
  CHECK(client->complete(req) == "second");
  CHECK(client->complete(req) == "second");  // last response repeats
  CHECK(client->invocations() == 3);
}

TEST_CASE("replay determinism: same tape and sequence give same responses") {
  auto tape = (fs::temp_directory_path() / "t_tape_det.jsonl").string();
  fs::remove(tape);
  LlmRequest a{"pa", 0.8, "m", 128};
  LlmRequest b{"pb", 0.8, "m", 128};
  append_replay_record(tape, a, "ra1");
  append_replay_record(tape, a, "ra2");
  append_replay_record(tape, b, "rb");

  LlmBackendConfig cfg;
  cfg.kind = LlmBackendKind::Replay;
  cfg.replay_path = tape;
  for (int run = 0; run < 2; ++run) {
    auto client = make_llm_client(cfg);
    CHECK(client->complete(a) == "ra1");
    CHECK(client->complete(b) == "rb");
    CHECK(client->complete(a) == "ra2");
    CHECK(client->invocations() == 3);
  }
}
