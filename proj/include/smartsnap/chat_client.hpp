#pragma once

// Minimal chat-completion client shared by the judge and the remote policy.
// Wire format: POST {model, messages:[{role, content}], temperature, max_tokens[, tools]}
// and read choices[0].message.{content, tool_calls}.

#include <condition_variable>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "smartsnap/error.hpp"

namespace smartsnap {

struct ChatMessage {
  std::string role;
  std::string content;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.6;
  int max_tokens = 4096;
  nlohmann::json tools;  // null when no tools are offered
};

struct ChatResponse {
  std::string content;
  nlohmann::json tool_calls = nlohmann::json::array();
};

nlohmann::json request_to_json(const ChatRequest& req);
// Throws TransportError when the body is not a chat-completion response.
ChatResponse response_from_json(const nlohmann::json& body);

class ChatClient {
 public:
  virtual ~ChatClient() = default;
  // Throws TransportError once the retry budget is exhausted.
  virtual ChatResponse complete(const ChatRequest& req) = 0;
};

struct EndpointConfig {
  std::string url;          // e.g. http://localhost:8000/v1/chat/completions
  std::string api_key_env;  // name of the environment variable holding the bearer token
  double timeout_seconds = 120.0;
  int max_retries = 2;
  int max_in_flight = 4;
};

// Counting limiter for concurrent requests.
class InFlightLimiter {
 public:
  explicit InFlightLimiter(int limit) : available_(limit < 1 ? 1 : limit) {}
  void acquire();
  void release();

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  int available_;
};

class HttpChatClient : public ChatClient {
 public:
  explicit HttpChatClient(EndpointConfig cfg);
  ChatResponse complete(const ChatRequest& req) override;

 private:
  EndpointConfig cfg_;
  std::string origin_;  // scheme://host[:port]
  std::string path_;
  InFlightLimiter limiter_;
};

}  // namespace smartsnap
