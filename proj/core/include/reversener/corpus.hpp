#pragma once

#include <compare>
#include <map>
#include <string>
#include <vector>

namespace reversener {

/// A task sentence. Ids are dense 0..N-1 in file order and stable for a run.
struct Sentence {
  int id = 0;
  std::string text;

  bool operator==(const Sentence&) const = default;
};

/// One entity span as (surface text, type label). Identity is the exact
/// case-sensitive pair throughout the pipeline.
struct EntityMention {
  std::string entity_text;
  std::string entity_label;

  auto operator<=>(const EntityMention&) const = default;
};

/// A sentence with its mention list. Library entries, gold labels and
/// predictions all share this shape.
struct LabeledExample {
  Sentence sentence;
  std::vector<EntityMention> entities;

  bool operator==(const LabeledExample&) const = default;
};

struct EntityTypeDef {
  std::string label;      // e.g. "PER"
  std::string full_name;  // e.g. "Person"
  std::string definition;

  bool operator==(const EntityTypeDef&) const = default;
};

struct TaskSet {
  std::vector<Sentence> sentences;
  bool has_gold = false;
  std::map<int, std::vector<EntityMention>> gold;

  bool operator==(const TaskSet&) const = default;
};

std::string trim(const std::string& s);

/// Checks the mention rules against a sentence: every entity_text is a
/// non-empty contiguous substring of the text, and, when a label set is
/// given, every label is a member of it. Returns an empty string on success,
/// otherwise a diagnostic naming the offending mention.
std::string validate_mentions(const std::string& text,
                              const std::vector<EntityMention>& mentions,
                              const std::vector<std::string>* labels);

/// Drops exact duplicate (text, label) pairs, keeping first occurrence order.
std::vector<EntityMention> dedup_mentions(std::vector<EntityMention> mentions);

/// Loads a token-per-line column corpus: one token per line, last column a
/// BIO tag, blank line between sentences. `spaced` controls whether tokens
/// are joined with spaces or concatenated (e.g. Chinese).
TaskSet load_conll(const std::string& path, char column_separator = ' ',
                   bool spaced = true);

/// Loads a JSONL corpus: {"text": str, "entities": [{entity_text, entity_label}]?}
/// per line. Records whose mentions violate the substring rule (or carry the
/// same surface text under two labels) are rejected with a diagnostic.
TaskSet load_jsonl(const std::string& path);

void write_jsonl(const TaskSet& task, const std::string& path);

std::vector<EntityTypeDef> load_type_defs(const std::string& path_or_json);
std::vector<std::string> type_labels(const std::vector<EntityTypeDef>& types);

}  // namespace reversener
