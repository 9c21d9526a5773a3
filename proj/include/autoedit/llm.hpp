#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

namespace autoedit {

/// Remote chat-completion endpoint. The token is read from the environment
/// variable named by api_key_env, never from a file.
struct LlmConfig {
  std::string endpoint;  // e.g. https://api.example.com/v1/chat/completions
  std::string model;
  std::string api_key_env = "AUTOEDIT_LLM_API_KEY";
  double timeout_s = 120.0;
  int max_tokens = 4096;

  bool configured() const { return !endpoint.empty(); }
};

LlmConfig llm_config_from_json(const nlohmann::json& j);

struct Prompt {
  std::string system;
  std::string user;
};

/// Request body for the chat-completion wire shape (temperature fixed at 0).
nlohmann::json chat_request_body(const Prompt& prompt, const LlmConfig& config);

/// Extracts choices[0].message.content; throws Error(Llm) otherwise.
std::string chat_response_text(const nlohmann::json& body);

/// Returns the cached response when present. Otherwise posts the prompt to the
/// configured endpoint and, on success, writes the text to cache_path.
std::string query_llm(const Prompt& prompt, const LlmConfig& config,
                      const std::optional<std::string>& cached,
                      const std::filesystem::path& cache_path);

}  // namespace autoedit
