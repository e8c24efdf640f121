#include "reversener/llm.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "reversener/util.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

namespace reversener {

namespace {

const char* kVocabularyBody =
    "Here is an entity type set: [{{entity_type_set}}].\n"
    "\n"
    "Here are the explanations of each entity from the label set:\n"
    "{{definitions}}\n"
    "\n"
    "Please imagine a list of at least {{words_per_type}} diverse words for "
    "each entity type in the set. The output must be a JSON object, where "
    "keys are the entity types and values are lists of words. Here is the "
    "output JSON structure example you must follow:\n"
    "{{vocab_block}}\n";

const char* kExpansionBody =
    "Here is an entity label set: [{{entity_type_set}}], do as follows:\n"
    "    Make {{sentences_per_cluster}} sentences with diverse styles and "
    "word orders.\n"
    "    Each sentence must contain one, two, or three entities from the "
    "following words:\n"
    "{{vocab_block}}\n"
    "\n"
    "If your generated sentences include entities that may belong to a "
    "certain type of entity label set but are not shown in the word list, "
    "mark them as well in the output JSON.\n"
    "Output format:\n"
    "[\n"
    "    {\n"
    "        \"text\": \"Your sentence here.\",\n"
    "        \"entities\": [\n"
    "            {\"entity_text\": \"the entity text\",\"entity_label\": "
    "\"the entity label\"}\n"
    "        ]\n"
    "    }\n"
    "]\n"
    "\n"
    "Here is a sentence for reference. You can reference its style and "
    "content, but ensure the generated sentence covers different topics and "
    "scenarios\n"
    "Reference Sentence: {{reference_sentence}}\n";

const char* kRecognitionBody =
    "Perform NER task in the following entity type set: "
    "[{{entity_type_set}}]\n"
    "Here are the explanations of each entity from the label set:\n"
    "{{definitions}}\n"
    "Output format: [{\"entity 1 text\": \"entity 1 type\"},{\"entity 2 "
    "text\": \"entity 2 type\"}]\n"
    "\n"
    "{{examples_block}}\n"
    "\n"
    "Test Input Sentence: {{task_sentence}} Output:";

std::vector<std::string> required_placeholders(PromptKind kind) {
  switch (kind) {
    case PromptKind::Vocabulary:
      return {"entity_type_set", "definitions", "words_per_type",
              "vocab_block"};
    case PromptKind::Expansion:
      return {"entity_type_set", "sentences_per_cluster", "vocab_block",
              "reference_sentence"};
    case PromptKind::Recognition:
      return {"entity_type_set", "definitions", "examples_block",
              "task_sentence"};
  }
  return {};
}

}  // namespace

PromptTemplate default_template(PromptKind kind) {
  switch (kind) {
    case PromptKind::Vocabulary:
      return {kind, kVocabularyBody};
    case PromptKind::Expansion:
      return {kind, kExpansionBody};
    case PromptKind::Recognition:
      return {kind, kRecognitionBody};
  }
  throw std::logic_error("unknown prompt kind");
}

std::string render(const PromptTemplate& tpl,
                   const std::map<std::string, std::string>& bindings) {
  for (const auto& name : required_placeholders(tpl.kind)) {
    auto it = bindings.find(name);
    if (it == bindings.end() || it->second.empty())
      throw std::runtime_error("prompt placeholder {{" + name +
                               "}} is required but unbound or empty");
  }
  std::string out = tpl.body;
  for (const auto& [name, value] : bindings) {
    std::string token = "{{" + name + "}}";
    size_t pos = 0;
    while ((pos = out.find(token, pos)) != std::string::npos) {
      out.replace(pos, token.size(), value);
      pos += value.size();
    }
  }
  if (auto left = out.find("{{"); left != std::string::npos) {
    auto end = out.find("}}", left);
    std::string name = end == std::string::npos
                           ? out.substr(left)
                           : out.substr(left + 2, end - left - 2);
    throw std::runtime_error("prompt placeholder {{" + name +
                             "}} left unbound");
  }
  return out;
}

std::string replay_key(const LlmRequest& req) {
  char temp[16];
  std::snprintf(temp, sizeof(temp), "%.2f", req.temperature);
  return sha256_hex(req.model_name + "\x1f" + temp + "\x1f" + req.prompt);
}

void append_replay_record(const std::string& path, const LlmRequest& req,
                          const std::string& response) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot append replay tape: " + path);
  char temp[16];
  std::snprintf(temp, sizeof(temp), "%.2f", req.temperature);
  auto now = std::chrono::duration_cast<std::chrono::seconds>(
                 std::chrono::system_clock::now().time_since_epoch())
                 .count();
  nlohmann::ordered_json rec = {
      {"key_hash", replay_key(req)}, {"model", req.model_name},
      {"temperature", temp},         {"prompt", req.prompt},
      {"response", response},        {"timestamp", now}};
  out << rec.dump() << "\n";
}

namespace {

class ReplayClient : public LlmClient {
 public:
  explicit ReplayClient(const LlmBackendConfig& cfg) {
    if (cfg.replay_path.empty())
      throw std::invalid_argument("replay backend requires replay_path");
    std::ifstream in(cfg.replay_path);
    if (!in)
      throw std::runtime_error("replay tape not found: " + cfg.replay_path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto rec = nlohmann::json::parse(line);
      tape_[rec.at("key_hash").get<std::string>()].push_back(
          rec.at("response").get<std::string>());
    }
  }

  // Repeated identical requests replay the recorded sequence in order; once
  // exhausted, the last recorded response repeats.
  std::string complete(const LlmRequest& req) override {
    std::string key = replay_key(req);
    auto it = tape_.find(key);
    if (it == tape_.end())
      throw std::runtime_error("replay miss for key " + key + " prompt \"" +
                               req.prompt.substr(0, 80) + "\"");
    size_t& cursor = cursors_[key];
    const auto& responses = it->second;
    std::string response =
        responses[cursor < responses.size() ? cursor : responses.size() - 1];
    ++cursor;
    ++invocations_;
    return response;
  }

 private:
  std::map<std::string, std::vector<std::string>> tape_;
  std::map<std::string, size_t> cursors_;
};

class RemoteClient : public LlmClient {
 public:
  explicit RemoteClient(LlmBackendConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.endpoint.empty())
      throw std::invalid_argument("remote-http backend requires an endpoint");
  }

  std::string complete(const LlmRequest& req) override {
    nlohmann::json body = {
        {"model", req.model_name},
        {"messages",
         nlohmann::json::array({{{"role", "user"}, {"content", req.prompt}}})},
        {"temperature", req.temperature},
        {"max_tokens", req.max_tokens}};
    auto [base, path] = split_url(cfg_.endpoint);
    httplib::Client client(base);
    client.set_read_timeout(static_cast<time_t>(cfg_.timeout_s), 0);
    httplib::Headers headers;
    if (const char* key = std::getenv("REVERSENER_LLM_KEY"))
      headers.emplace("Authorization", std::string("Bearer ") + key);

    std::string last_error;
    for (int attempt = 0; attempt <= cfg_.retry_limit; ++attempt) {
      if (attempt > 0)
        std::this_thread::sleep_for(
            std::chrono::milliseconds(500 * (1 << (attempt - 1))));
      auto res = client.Post(path, headers, body.dump(), "application/json");
      if (!res) {
        last_error = "transport error";
        continue;
      }
      if (res->status != 200) {
        last_error = "status " + std::to_string(res->status);
        if (res->status >= 400 && res->status < 500 && res->status != 429)
          break;  // not transient
        continue;
      }
      auto doc = nlohmann::json::parse(res->body);
      std::string text = doc.at("choices").at(0).at("message").at("content")
                             .get<std::string>();
      if (!cfg_.replay_path.empty())
        append_replay_record(cfg_.replay_path, req, text);
      ++invocations_;
      return text;
    }
    throw std::runtime_error("LLM request failed after retries: " + last_error);
  }

 private:
  LlmBackendConfig cfg_;
};

}  // namespace

std::unique_ptr<LlmClient> make_llm_client(const LlmBackendConfig& cfg) {
  if (cfg.kind == LlmBackendKind::Replay)
    return std::make_unique<ReplayClient>(cfg);
  return std::make_unique<RemoteClient>(cfg);
}

}  // namespace reversener
