#pragma once

#include <map>
#include <string>
#include <vector>

#include "reversener/corpus.hpp"
#include "reversener/librarian.hpp"
#include "reversener/llm.hpp"

namespace reversener {

struct InferenceAttempt {
  int attempt_index = 0;
  std::string raw_response;
  std::vector<EntityMention> entities;  // empty when parse_ok is false
  bool parse_ok = false;
};

enum class ScMode { Single, EntitySc, ResponseSc };

std::string to_string(ScMode mode);

struct InferenceRecord {
  int sentence_id = 0;
  std::vector<InferenceAttempt> attempts;
  std::map<EntityMention, int> entity_scores;
  std::vector<double> attempt_scores;
  std::vector<EntityMention> chosen;
  ScMode mode = ScMode::Single;
  bool all_failed = false;
};

/// One inference attempt: renders the recognition prompt with the given
/// examples (ordered by descending similarity), parses the response as a JSON
/// array of one-pair {text: label} objects, validates mentions against the
/// sentence and label set, deduplicates to set semantics.
InferenceAttempt recognize_once(const Sentence& sentence,
                                const std::vector<LabeledExample>& examples,
                                const std::vector<EntityTypeDef>& types,
                                LlmClient& llm, const LlmCallOptions& opts,
                                int attempt_index = 0);

/// Entity-level self-consistency: SC(E) counts attempts containing E, each
/// attempt scores the mean SC of its entities (0 when it predicted none).
/// If strictly more than half of the attempts are empty the chosen set is
/// empty; otherwise the attempt with maximal score wins, ties to the lowest
/// attempt index.
void entity_sc_vote(InferenceRecord& record);

/// Response-level SC: majority vote over whole prediction sets; ties go to
/// the group containing the lowest attempt index.
std::vector<EntityMention> response_sc_vote(
    const std::vector<InferenceAttempt>& attempts);

struct RecognizeOptions {
  int top_k = 5;
  ScMode sc_mode = ScMode::Single;
  int attempts = 1;
  LlmCallOptions llm;
};

InferenceRecord recognize_sentence(const Sentence& sentence,
                                   const ExampleLibrary& library,
                                   const EmbeddingVector& sentence_vec,
                                   const RecognizeOptions& opts,
                                   const std::vector<EntityTypeDef>& types,
                                   LlmClient& llm);

/// "Example N: Input sentence: ... Output: [...]" lines for the prompt.
std::string examples_block(const std::vector<LabeledExample>& examples);

}  // namespace reversener
