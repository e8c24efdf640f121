#include "reversener/recognizer.hpp"

#include <algorithm>
#include <iostream>
#include <set>
#include <stdexcept>

#include "json.hpp"
#include "reversener/selector.hpp"
#include "reversener/util.hpp"

namespace reversener {

std::string to_string(ScMode mode) {
  switch (mode) {
    case ScMode::Single:
      return "single";
    case ScMode::EntitySc:
      return "entity-sc";
    case ScMode::ResponseSc:
      return "response-sc";
  }
  return "unknown";
}

std::string examples_block(const std::vector<LabeledExample>& examples) {
  std::string out;
  for (size_t i = 0; i < examples.size(); ++i) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& m : examples[i].entities)
      arr.push_back({{m.entity_text, m.entity_label}});
    out += "Example " + std::to_string(i + 1) +
           ": Input sentence: " + examples[i].sentence.text +
           " Output: " + arr.dump() + "\n";
  }
  if (!out.empty()) out.pop_back();
  return out;
}

InferenceAttempt recognize_once(const Sentence& sentence,
                                const std::vector<LabeledExample>& examples,
                                const std::vector<EntityTypeDef>& types,
                                LlmClient& llm, const LlmCallOptions& opts,
                                int attempt_index) {
  auto tpl = default_template(PromptKind::Recognition);
  LlmRequest req;
  req.prompt = render(tpl, {{"entity_type_set", entity_type_set_block(types)},
                            {"definitions", definitions_block(types)},
                            {"examples_block", examples_block(examples)},
                            {"task_sentence", sentence.text}});
  req.temperature = opts.temperature;
  req.model_name = opts.model_name;
  req.max_tokens = opts.max_tokens;

  InferenceAttempt attempt;
  attempt.attempt_index = attempt_index;
  attempt.raw_response = llm.complete(req);

  auto arr = extract_json_array(attempt.raw_response);
  if (!arr) return attempt;  // parse_ok stays false, entities empty

  auto labels = type_labels(types);
  auto doc = nlohmann::json::parse(*arr);
  std::vector<EntityMention> mentions;
  for (const auto& item : doc) {
    if (!item.is_object()) continue;
    for (auto it = item.begin(); it != item.end(); ++it) {
      if (!it.value().is_string()) continue;
      EntityMention m{trim(it.key()), trim(it.value().get<std::string>())};
      std::string err = validate_mentions(sentence.text, {m}, &labels);
      if (!err.empty()) {
        std::cerr << "warning: predicted mention dropped: " << err << "\n";
        continue;
      }
      mentions.push_back(std::move(m));
    }
  }
  attempt.parse_ok = true;
  attempt.entities = dedup_mentions(std::move(mentions));
  return attempt;
}

void entity_sc_vote(InferenceRecord& record) {
  const auto& attempts = record.attempts;
  if (attempts.empty())
    throw std::invalid_argument("entity_sc_vote: no attempts");
  const int a = static_cast<int>(attempts.size());

  record.entity_scores.clear();
  for (const auto& at : attempts) {
    std::set<EntityMention> seen(at.entities.begin(), at.entities.end());
    for (const auto& e : seen) record.entity_scores[e] += 1;
  }

  record.attempt_scores.assign(a, 0.0);
  for (int i = 0; i < a; ++i) {
    if (attempts[i].entities.empty()) continue;
    double sum = 0;
    for (const auto& e : attempts[i].entities)
      sum += record.entity_scores.at(e);
    record.attempt_scores[i] = sum / attempts[i].entities.size();
  }

  int empty_count = static_cast<int>(
      std::count_if(attempts.begin(), attempts.end(),
                    [](const auto& at) { return at.entities.empty(); }));
  if (2 * empty_count > a) {  // strict majority of no-entity attempts
    record.chosen.clear();
    return;
  }

  int best = 0;
  for (int i = 1; i < a; ++i)
    if (record.attempt_scores[i] > record.attempt_scores[best]) best = i;
  record.chosen = attempts[best].entities;
}

std::vector<EntityMention> response_sc_vote(
    const std::vector<InferenceAttempt>& attempts) {
  if (attempts.empty())
    throw std::invalid_argument("response_sc_vote: no attempts");
  std::vector<std::set<EntityMention>> sets;
  for (const auto& at : attempts)
    sets.emplace_back(at.entities.begin(), at.entities.end());

  int best = 0;
  int best_count = 0;
  for (size_t i = 0; i < sets.size(); ++i) {
    int count = 0;
    for (const auto& other : sets)
      if (other == sets[i]) ++count;
    if (count > best_count) {
      best_count = count;
      best = static_cast<int>(i);
    }
  }
  return attempts[best].entities;
}

InferenceRecord recognize_sentence(const Sentence& sentence,
                                   const ExampleLibrary& library,
                                   const EmbeddingVector& sentence_vec,
                                   const RecognizeOptions& opts,
                                   const std::vector<EntityTypeDef>& types,
                                   LlmClient& llm) {
  if (library.examples.empty())
    throw std::invalid_argument("recognize_sentence: empty library");
  int attempts = opts.sc_mode == ScMode::Single ? 1 : opts.attempts;
  if (attempts < 1)
    throw std::invalid_argument("recognize_sentence: attempts < 1");

  auto matrix = similarity_matrix({sentence_vec}, library.embeddings);
  auto selection = select_top_k(matrix, opts.top_k);
  std::vector<LabeledExample> examples;
  for (int j : selection.per_sentence.front())
    examples.push_back(library.examples[j]);

  InferenceRecord record;
  record.sentence_id = sentence.id;
  record.mode = opts.sc_mode;
  for (int i = 0; i < attempts; ++i)
    record.attempts.push_back(
        recognize_once(sentence, examples, types, llm, opts.llm, i));

  record.all_failed = std::all_of(record.attempts.begin(),
                                  record.attempts.end(),
                                  [](const auto& at) { return !at.parse_ok; });

  switch (opts.sc_mode) {
    case ScMode::Single:
      record.chosen = record.attempts.front().entities;
      break;
    case ScMode::EntitySc:
      entity_sc_vote(record);
      break;
    case ScMode::ResponseSc:
      record.chosen = response_sc_vote(record.attempts);
      break;
  }
  return record;
}

}  // namespace reversener
