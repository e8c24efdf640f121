#include "reversener/librarian.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "reversener/util.hpp"

namespace reversener {

std::string definitions_block(const std::vector<EntityTypeDef>& types) {
  std::string out;
  for (const auto& t : types) {
    out += "    " + t.label + " means " + t.full_name +
           ". Definition: " + t.definition + "\n";
  }
  if (!out.empty()) out.pop_back();
  return out;
}

std::string entity_type_set_block(const std::vector<EntityTypeDef>& types) {
  std::string out;
  for (size_t i = 0; i < types.size(); ++i) {
    if (i) out += ", ";
    out += types[i].label;
  }
  return out;
}

std::string vocab_structure_example(const std::vector<EntityTypeDef>& types) {
  std::string out = "{\n";
  for (size_t i = 0; i < types.size(); ++i) {
    const auto& l = types[i].label;
    out += "    \"" + l + "\": [\"" + l + "_1\", \"" + l + "_2\", \"" + l +
           "_3\"]";
    if (i + 1 < types.size()) out += ",";
    out += "\n";
  }
  out += "}";
  return out;
}

std::string vocab_words_block(const EntityVocabulary& vocab) {
  std::string out;
  for (const auto& [label, words] : vocab.words) {
    out += "        " + label + ": ";
    for (size_t i = 0; i < words.size(); ++i) {
      if (i) out += ", ";
      out += words[i];
    }
    out += "\n";
  }
  if (!out.empty()) out.pop_back();
  return out;
}

EntityVocabulary generate_vocabulary(const std::vector<EntityTypeDef>& types,
                                     int words_per_type, LlmClient& llm,
                                     const LlmCallOptions& opts) {
  if (types.empty())
    throw std::invalid_argument("generate_vocabulary: empty type set");
  if (words_per_type < 1)
    throw std::invalid_argument("generate_vocabulary: words_per_type < 1");

  auto tpl = default_template(PromptKind::Vocabulary);
  LlmRequest req;
  req.prompt = render(tpl, {{"entity_type_set", entity_type_set_block(types)},
                            {"definitions", definitions_block(types)},
                            {"words_per_type", std::to_string(words_per_type)},
                            {"vocab_block", vocab_structure_example(types)}});
  req.temperature = opts.temperature;
  req.model_name = opts.model_name;
  req.max_tokens = opts.max_tokens;

  std::string last_problem;
  std::string last_raw;
  for (int attempt = 0; attempt <= opts.parse_retry; ++attempt) {
    last_raw = llm.complete(req);
    auto obj = extract_json_object(last_raw);
    if (!obj) {
      last_problem = "no JSON object in response";
      continue;
    }
    auto doc = nlohmann::json::parse(*obj);
    EntityVocabulary vocab;
    bool ok = true;
    for (const auto& t : types) {
      if (!doc.contains(t.label) || !doc[t.label].is_array()) {
        last_problem = "missing label key \"" + t.label + "\"";
        ok = false;
        break;
      }
      std::vector<std::string> words;
      for (const auto& w : doc[t.label]) {
        if (!w.is_string()) continue;
        std::string s = trim(w.get<std::string>());
        if (s.empty()) continue;
        if (std::find(words.begin(), words.end(), s) == words.end())
          words.push_back(std::move(s));
      }
      if (words.empty()) {
        last_problem = "empty word list for \"" + t.label + "\"";
        ok = false;
        break;
      }
      vocab.words[t.label] = std::move(words);
    }
    if (ok) return vocab;
  }
  throw std::runtime_error("vocabulary generation failed (" + last_problem +
                           "); raw response: " + last_raw);
}

namespace {

std::vector<LabeledExample> parse_expansion(
    const std::string& raw, const std::vector<std::string>& labels) {
  std::vector<LabeledExample> out;
  auto arr = extract_json_array(raw);
  if (!arr) return out;
  auto doc = nlohmann::json::parse(*arr);
  for (const auto& item : doc) {
    if (!item.is_object() || !item.contains("text")) continue;
    LabeledExample ex;
    ex.sentence.text = trim(item["text"].get<std::string>());
    if (ex.sentence.text.empty()) continue;
    if (item.contains("entities")) {
      for (const auto& e : item["entities"]) {
        if (!e.contains("entity_text") || !e.contains("entity_label"))
          continue;
        ex.entities.push_back({trim(e["entity_text"].get<std::string>()),
                               trim(e["entity_label"].get<std::string>())});
      }
    }
    std::string err = validate_mentions(ex.sentence.text, ex.entities, &labels);
    if (!err.empty()) {
      std::cerr << "warning: generated example dropped: " << err << "\n";
      continue;
    }
    if (ex.entities.empty()) {
      std::cerr << "warning: generated example with no entities dropped: \""
                << ex.sentence.text << "\"\n";
      continue;
    }
    ex.entities = dedup_mentions(std::move(ex.entities));
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace

std::vector<LabeledExample> expand_cluster(
    const EntityVocabulary& vocab, const Sentence& feature, int n,
    const std::vector<EntityTypeDef>& types, LlmClient& llm,
    const LlmCallOptions& opts) {
  if (n < 1) throw std::invalid_argument("expand_cluster: n < 1");

  auto tpl = default_template(PromptKind::Expansion);
  LlmRequest req;
  req.prompt =
      render(tpl, {{"entity_type_set", entity_type_set_block(types)},
                   {"sentences_per_cluster", std::to_string(n)},
                   {"vocab_block", vocab_words_block(vocab)},
                   {"reference_sentence", feature.text}});
  req.temperature = opts.temperature;
  req.model_name = opts.model_name;
  req.max_tokens = opts.max_tokens;

  auto labels = type_labels(types);
  std::vector<LabeledExample> valid = parse_expansion(llm.complete(req), labels);
  if (static_cast<int>(valid.size()) < n) {
    for (const auto& ex : parse_expansion(llm.complete(req), labels)) {
      bool dup = std::any_of(valid.begin(), valid.end(), [&](const auto& v) {
        return v.sentence.text == ex.sentence.text;
      });
      if (!dup) valid.push_back(ex);
    }
  }
  if (valid.empty())
    throw std::runtime_error(
        "cluster expansion produced no valid example for feature sentence \"" +
        feature.text + "\"");
  if (static_cast<int>(valid.size()) > n) valid.resize(n);
  return valid;
}

ExampleLibrary build_library(const TaskSet& task,
                             const LibraryBuildOptions& opts,
                             const std::vector<EntityTypeDef>& types,
                             LlmClient& llm, EmbeddingProvider& embedder) {
  if (task.sentences.empty())
    throw std::invalid_argument("build_library: empty task set");

  std::vector<std::string> texts;
  texts.reserve(task.sentences.size());
  for (const auto& s : task.sentences) texts.push_back(s.text);
  auto vectors = embedder.embed_batch(texts);

  auto clustering = kmedoids(vectors, opts.clusters, opts.seed, opts.max_iter);
  auto features = feature_sentences(clustering, task);

  ExampleLibrary lib;
  lib.seed = opts.seed;
  lib.config_hash = opts.config_hash;
  lib.embed_provider_id = embedder.provider_id();
  lib.llm_model = opts.llm.model_name;

  EntityVocabulary shared_vocab;
  if (!opts.vocab_per_cluster)
    shared_vocab =
        generate_vocabulary(types, opts.words_per_type, llm, opts.llm);

  for (size_t c = 0; c < features.size(); ++c) {
    const EntityVocabulary vocab =
        opts.vocab_per_cluster
            ? generate_vocabulary(types, opts.words_per_type, llm, opts.llm)
            : shared_vocab;
    auto examples =
        expand_cluster(vocab, features[c], opts.per_cluster, types, llm,
                       opts.llm);
    for (auto& ex : examples) {
      ex.sentence.id = static_cast<int>(lib.examples.size());
      lib.provenance.emplace_back(static_cast<int>(c), features[c].id);
      lib.examples.push_back(std::move(ex));
    }
  }

  std::vector<std::string> example_texts;
  for (const auto& ex : lib.examples) example_texts.push_back(ex.sentence.text);
  lib.embeddings = embedder.embed_batch(example_texts);
  return lib;
}

void save_library(const ExampleLibrary& lib, const std::string& path) {
  nlohmann::ordered_json doc;
  doc["meta"] = {{"seed", lib.seed},
                 {"config_hash", lib.config_hash},
                 {"embed_provider_id", lib.embed_provider_id},
                 {"llm_model", lib.llm_model},
                 {"provenance", lib.provenance}};
  doc["examples"] = nlohmann::ordered_json::array();
  for (const auto& ex : lib.examples) {
    nlohmann::ordered_json entities = nlohmann::ordered_json::array();
    for (const auto& m : ex.entities)
      entities.push_back(
          {{"entity_text", m.entity_text}, {"entity_label", m.entity_label}});
    doc["examples"].push_back(
        {{"text", ex.sentence.text}, {"entities", entities}});
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write library file: " + path);
  out << doc.dump(2) << "\n";
}

ExampleLibrary load_library(const std::string& path,
                            EmbeddingProvider& embedder) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open library file: " + path);
  nlohmann::json doc = nlohmann::json::parse(in);

  ExampleLibrary lib;
  const auto& meta = doc.at("meta");
  lib.seed = meta.value("seed", 0ull);
  lib.config_hash = meta.value("config_hash", "");
  lib.embed_provider_id = meta.value("embed_provider_id", "");
  lib.llm_model = meta.value("llm_model", "");
  if (meta.contains("provenance"))
    lib.provenance = meta["provenance"].get<std::vector<std::pair<int, int>>>();

  int id = 0;
  for (const auto& item : doc.at("examples")) {
    LabeledExample ex;
    ex.sentence.id = id++;
    ex.sentence.text = item.at("text").get<std::string>();
    for (const auto& e : item.at("entities"))
      ex.entities.push_back({e.at("entity_text").get<std::string>(),
                             e.at("entity_label").get<std::string>()});
    std::string err = validate_mentions(ex.sentence.text, ex.entities, nullptr);
    if (!err.empty())
      throw std::runtime_error("library file violates mention rules: " + err);
    lib.examples.push_back(std::move(ex));
  }

  std::vector<std::string> texts;
  for (const auto& ex : lib.examples) texts.push_back(ex.sentence.text);
  if (!texts.empty()) lib.embeddings = embedder.embed_batch(texts);
  return lib;
}

}  // namespace reversener
