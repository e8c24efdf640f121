#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace reversener {

enum class PromptKind { Vocabulary, Expansion, Recognition };

/// A prompt body with {{name}} placeholders. Rendering fails on an unbound
/// (or empty-bound) required placeholder and on any leftover {{.
struct PromptTemplate {
  PromptKind kind = PromptKind::Recognition;
  std::string body;
};

PromptTemplate default_template(PromptKind kind);

std::string render(const PromptTemplate& tpl,
                   const std::map<std::string, std::string>& bindings);

struct LlmRequest {
  std::string prompt;
  double temperature = 0.8;
  std::string model_name;
  int max_tokens = 1024;
};

enum class LlmBackendKind { RemoteHttp, Replay };

struct LlmBackendConfig {
  LlmBackendKind kind = LlmBackendKind::Replay;
  std::string endpoint;     // remote-http
  std::string replay_path;  // replay tape; remote appends every response here
  int retry_limit = 3;
  double timeout_s = 120.0;
};

/// Key a replay record stands under: SHA-256 of model name, temperature
/// bucketed to 2 decimals, and the full prompt.
std::string replay_key(const LlmRequest& req);

class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual std::string complete(const LlmRequest& req) = 0;
  std::uint64_t invocations() const { return invocations_; }

 protected:
  std::atomic<std::uint64_t> invocations_{0};
};

std::unique_ptr<LlmClient> make_llm_client(const LlmBackendConfig& cfg);

/// Appends one record in the replay-tape schema.
void append_replay_record(const std::string& path, const LlmRequest& req,
                          const std::string& response);

}  // namespace reversener
