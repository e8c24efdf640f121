#include "reversener/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace reversener {

std::string trim(const std::string& s) {
  auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::string validate_mentions(const std::string& text,
                              const std::vector<EntityMention>& mentions,
                              const std::vector<std::string>* labels) {
  for (const auto& m : mentions) {
    if (m.entity_text.empty())
      return "empty entity_text";
    if (text.find(m.entity_text) == std::string::npos)
      return "entity_text \"" + m.entity_text + "\" is not a substring of \"" +
             text + "\"";
    if (labels &&
        std::find(labels->begin(), labels->end(), m.entity_label) ==
            labels->end())
      return "unknown entity_label \"" + m.entity_label + "\" for \"" +
             m.entity_text + "\"";
  }
  return "";
}

std::vector<EntityMention> dedup_mentions(std::vector<EntityMention> mentions) {
  std::vector<EntityMention> out;
  for (auto& m : mentions) {
    if (std::find(out.begin(), out.end(), m) == out.end())
      out.push_back(std::move(m));
  }
  return out;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> cols;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      if (!cur.empty()) cols.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) cols.push_back(cur);
  return cols;
}

// Same surface text under two different labels in one sentence: the record is
// rejected rather than guessed at.
bool has_label_conflict(const std::vector<EntityMention>& mentions) {
  for (size_t i = 0; i < mentions.size(); ++i)
    for (size_t j = i + 1; j < mentions.size(); ++j)
      if (mentions[i].entity_text == mentions[j].entity_text &&
          mentions[i].entity_label != mentions[j].entity_label)
        return true;
  return false;
}

struct RawSentence {
  std::string text;
  std::vector<EntityMention> mentions;
};

void append_sentence(TaskSet& task, RawSentence raw) {
  if (raw.text.empty()) return;
  if (has_label_conflict(raw.mentions)) {
    std::cerr << "warning: sentence \"" << raw.text
              << "\" carries one surface form under two labels; skipped\n";
    return;
  }
  Sentence s;
  s.id = static_cast<int>(task.sentences.size());
  s.text = raw.text;
  if (!raw.mentions.empty()) task.gold[s.id] = dedup_mentions(raw.mentions);
  task.sentences.push_back(std::move(s));
}

}  // namespace

TaskSet load_conll(const std::string& path, char column_separator,
                   bool spaced) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);

  TaskSet task;
  task.has_gold = true;

  std::vector<std::string> tokens;
  std::vector<std::string> tags;

  auto flush = [&]() {
    if (tokens.empty()) return;
    RawSentence raw;
    std::string sep = spaced ? " " : "";
    for (size_t i = 0; i < tokens.size(); ++i) {
      if (i) raw.text += sep;
      raw.text += tokens[i];
    }
    // BIO spans -> mentions
    std::string span_label;
    std::string span_text;
    auto close_span = [&]() {
      if (!span_label.empty())
        raw.mentions.push_back({span_text, span_label});
      span_label.clear();
      span_text.clear();
    };
    for (size_t i = 0; i < tokens.size(); ++i) {
      const std::string& tag = tags[i];
      if (tag == "O" || tag.size() < 3) {
        close_span();
        continue;
      }
      char kind = tag[0];
      std::string label = tag.substr(2);
      if (kind == 'I' && label != span_label) {
        std::cerr << "warning: I-" << label
                  << " without open span, treating as B-" << label << "\n";
        kind = 'B';
      }
      if (kind == 'B') {
        close_span();
        span_label = label;
        span_text = tokens[i];
      } else {  // I continuing the open span
        span_text += sep + tokens[i];
      }
    }
    close_span();
    tokens.clear();
    tags.clear();
    append_sentence(task, std::move(raw));
  };

  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) {
      flush();
      continue;
    }
    auto cols = split(line, column_separator);
    if (cols.size() < 2) {
      std::cerr << "warning: skipping malformed line: " << line << "\n";
      continue;
    }
    tokens.push_back(cols.front());
    tags.push_back(cols.back());
  }
  flush();
  return task;
}

TaskSet load_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);

  TaskSet task;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("invalid JSON at " + path + ":" +
                               std::to_string(lineno) + ": " + e.what());
    }
    RawSentence raw;
    raw.text = trim(rec.at("text").get<std::string>());
    if (raw.text.empty()) {
      std::cerr << "warning: empty text at line " << lineno << "; skipped\n";
      continue;
    }
    bool labeled = rec.contains("entities");
    if (labeled) {
      for (const auto& e : rec["entities"])
        raw.mentions.push_back({e.at("entity_text").get<std::string>(),
                                e.at("entity_label").get<std::string>()});
      std::string err = validate_mentions(raw.text, raw.mentions, nullptr);
      if (!err.empty()) {
        std::cerr << "warning: record at line " << lineno << " rejected: "
                  << err << "\n";
        continue;
      }
      task.has_gold = true;
      if (raw.mentions.empty()) {
        // labeled sentence with explicitly no entities
        size_t before = task.sentences.size();
        append_sentence(task, std::move(raw));
        if (task.sentences.size() > before)
          task.gold[task.sentences.back().id] = {};
        continue;
      }
    }
    append_sentence(task, std::move(raw));
  }
  return task;
}

void write_jsonl(const TaskSet& task, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write corpus file: " + path);
  for (const auto& s : task.sentences) {
    nlohmann::ordered_json rec;
    rec["text"] = s.text;
    auto it = task.gold.find(s.id);
    if (it != task.gold.end()) {
      rec["entities"] = nlohmann::ordered_json::array();
      for (const auto& m : it->second)
        rec["entities"].push_back({{"entity_text", m.entity_text},
                                   {"entity_label", m.entity_label}});
    }
    out << rec.dump() << "\n";
  }
}

std::vector<EntityTypeDef> load_type_defs(const std::string& path_or_json) {
  nlohmann::json doc;
  std::string text = path_or_json;
  if (trim(text).empty())
    throw std::runtime_error("empty entity type definitions");
  if (trim(text)[0] != '[') {
    std::ifstream in(path_or_json);
    if (!in)
      throw std::runtime_error("cannot open type definitions: " + path_or_json);
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  doc = nlohmann::json::parse(text);
  std::vector<EntityTypeDef> types;
  std::set<std::string> seen;
  for (const auto& t : doc) {
    EntityTypeDef d;
    d.label = t.at("label").get<std::string>();
    d.full_name = t.value("full_name", d.label);
    d.definition = t.at("definition").get<std::string>();
    if (!seen.insert(d.label).second)
      throw std::runtime_error("duplicate type label: " + d.label);
    types.push_back(std::move(d));
  }
  if (types.empty()) throw std::runtime_error("entity type set is empty");
  return types;
}

std::vector<std::string> type_labels(const std::vector<EntityTypeDef>& types) {
  std::vector<std::string> labels;
  labels.reserve(types.size());
  for (const auto& t : types) labels.push_back(t.label);
  return labels;
}

}  // namespace reversener
