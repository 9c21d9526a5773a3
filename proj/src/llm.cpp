#include "autoedit/llm.hpp"

#include <cstdlib>
#include <fstream>

#include <httplib.h>

#include "autoedit/error.hpp"

namespace autoedit {

namespace {

[[noreturn]] void fail(ErrorKind kind, const std::string& message) { throw Error(kind, "dialogue", message); }

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) fail(ErrorKind::Config, "LLM endpoint '" + url + "' is not an absolute URL");
  const auto path_begin = url.find('/', scheme_end + 3);
  if (path_begin == std::string::npos) return {url, "/"};
  return {url.substr(0, path_begin), url.substr(path_begin)};
}

}  // namespace

LlmConfig llm_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::Validation, "params", "'llm' must be an object");
  LlmConfig config;
  for (const auto& [key, value] : j.items()) {
    if (key == "endpoint" && value.is_string()) config.endpoint = value.get<std::string>();
    else if (key == "model" && value.is_string()) config.model = value.get<std::string>();
    else if (key == "api_key_env" && value.is_string()) config.api_key_env = value.get<std::string>();
    else if (key == "timeout_s" && value.is_number()) config.timeout_s = value.get<double>();
    else if (key == "max_tokens" && value.is_number_integer()) config.max_tokens = value.get<int>();
    else throw Error(ErrorKind::Validation, "params", "invalid 'llm' key or value type: '" + key + "'");
  }
  return config;
}

nlohmann::json chat_request_body(const Prompt& prompt, const LlmConfig& config) {
  return {
      {"model", config.model},
      {"temperature", 0},
      {"max_tokens", config.max_tokens},
      {"messages",
       nlohmann::json::array({{{"role", "system"}, {"content", prompt.system}},
                              {{"role", "user"}, {"content", prompt.user}}})},
  };
}

std::string chat_response_text(const nlohmann::json& body) {
  const auto* content = [&]() -> const nlohmann::json* {
    if (!body.contains("choices") || !body["choices"].is_array() || body["choices"].empty()) return nullptr;
    const auto& choice = body["choices"][0];
    if (!choice.contains("message") || !choice["message"].contains("content")) return nullptr;
    return &choice["message"]["content"];
  }();
  if (!content || !content->is_string()) fail(ErrorKind::Llm, "LLM response has no choices[0].message.content");
  auto text = content->get<std::string>();
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) fail(ErrorKind::Llm, "LLM returned an empty response");
  return text;
}

std::string query_llm(const Prompt& prompt, const LlmConfig& config, const std::optional<std::string>& cached,
                      const std::filesystem::path& cache_path) {
  if (cached) {
    if (cached->find_first_not_of(" \t\r\n") == std::string::npos) {
      fail(ErrorKind::Llm, "cached LLM response " + cache_path.string() + " is empty");
    }
    return *cached;
  }
  if (!config.configured()) {
    fail(ErrorKind::Config, "no cached LLM response at " + cache_path.string() + " and no LLM endpoint configured");
  }

  const auto endpoint = split_url(config.endpoint);
  httplib::Client client(endpoint.origin);
  if (!client.is_valid()) fail(ErrorKind::Config, "unsupported LLM endpoint '" + config.endpoint + "'");
  const auto timeout_ms = static_cast<time_t>(config.timeout_s * 1000.0);
  client.set_connection_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
  client.set_read_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);

  httplib::Headers headers;
  if (const char* token = std::getenv(config.api_key_env.c_str()); token && *token) {
    headers.emplace("Authorization", std::string("Bearer ") + token);
  }
  const auto res = client.Post(endpoint.path, headers, chat_request_body(prompt, config).dump(), "application/json");
  if (!res) fail(ErrorKind::Llm, "LLM request failed: " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300) {
    fail(ErrorKind::Llm, "LLM endpoint returned HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 500));
  }

  nlohmann::json body;
  try {
    body = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::parse_error&) {
    fail(ErrorKind::Llm, "LLM endpoint returned a non-JSON body");
  }
  auto text = chat_response_text(body);

  std::ofstream out(cache_path, std::ios::binary);
  if (!out || !(out << text)) fail(ErrorKind::Io, "cannot write LLM response to " + cache_path.string());
  return text;
}

}  // namespace autoedit
