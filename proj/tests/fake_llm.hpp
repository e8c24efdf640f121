#pragma once

#include <functional>
#include <string>

#include "reversener/llm.hpp"

namespace reversener::testing {

/// LlmClient driven by a response function. When record_path is set every
/// exchange is appended to a replay tape, so a scripted run doubles as a
/// fixture generator.
class ScriptedClient : public LlmClient {
 public:
  using Responder = std::function<std::string(const LlmRequest&)>;

  explicit ScriptedClient(Responder responder, std::string record_path = "")
      : responder_(std::move(responder)),
        record_path_(std::move(record_path)) {}

  std::string complete(const LlmRequest& req) override {
    std::string response = responder_(req);
    if (!record_path_.empty())
      append_replay_record(record_path_, req, response);
    ++invocations_;
    return response;
  }

 private:
  Responder responder_;
  std::string record_path_;
};

/// Deterministic rule-based stand-in for all three prompt kinds, tuned to the
/// committed toy corpus: fixed vocabulary, reference-sentence-dependent
/// expansions, and substring-scan recognition with a couple of deliberate
/// mistakes so evaluation reports are non-trivial.
std::string toy_responder(const LlmRequest& req);

}  // namespace reversener::testing
