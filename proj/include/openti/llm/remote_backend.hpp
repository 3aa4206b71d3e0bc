// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <openti/llm/chat.hpp>

#include <chrono>
#include <string>

namespace openti::llm
{

struct RemoteConfig
{
    /// Full chat-completions URL, or a base URL to which "/chat/completions" is appended.
    std::string endpoint;
    std::string api_key;
    std::string model = "gpt-3.5-turbo";
    int max_retries = 2;
    std::chrono::milliseconds backoff_base {100};
    std::chrono::milliseconds connect_timeout {10000};
    std::chrono::seconds timeout {60};
};

/// OpenAI-compatible chat-completions client. Transport failures, 429 and 5xx
/// are retried `max_retries` times with exponential backoff (base, 2*base, ...)
/// before NetworkError; 401/403 raise AuthError without retrying.
class RemoteBackend final : public LlmBackend
{
public:
    explicit RemoteBackend(RemoteConfig config);

    [[nodiscard]] std::string name() const override { return "remote"; }
    [[nodiscard]] const RemoteConfig& config() const noexcept { return _config; }

private:
    ChatResponse do_complete(const ChatRequest& request) override;

    RemoteConfig _config;
    std::string _origin;
    std::string _path;
};

} // namespace openti::llm
