// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <nlohmann/json.hpp>

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace openti::llm
{

enum class Role
{
    system,
    user,
    assistant,
    tool,
};

std::string_view to_string(Role role) noexcept;
Role role_from_string(std::string_view s);

struct ChatMessage
{
    Role role = Role::user;
    std::string content;
};

struct ChatRequest
{
    std::string model_id;
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    int max_tokens = 1024;

    /// Throws InvalidArgument: empty messages, first role not system/user,
    /// temperature outside [0,1], non-positive max_tokens.
    void validate() const;

    /// Content of the last user-role message, or empty when there is none.
    [[nodiscard]] std::string_view last_user_message() const noexcept;

    /// Number of assistant messages after the last user message.
    [[nodiscard]] std::size_t assistant_turns_since_user() const noexcept;

    [[nodiscard]] nlohmann::json to_openai_json() const;
};

enum class FinishReason
{
    stop,
    length,
    error,
};

std::string_view to_string(FinishReason reason) noexcept;

struct Usage
{
    int prompt_tokens = 0;
    int completion_tokens = 0;
};

struct ChatResponse
{
    std::string content;
    FinishReason finish_reason = FinishReason::stop;
    Usage usage;
};

/// Rough whitespace token count used where a backend reports no usage.
int approx_tokens(std::string_view text) noexcept;

/// A language-model backend. `complete` validates the request and then
/// delegates; implementations must be safe for concurrent calls.
class LlmBackend
{
public:
    virtual ~LlmBackend() = default;

    ChatResponse complete(const ChatRequest& request);

    [[nodiscard]] virtual std::string name() const = 0;

private:
    virtual ChatResponse do_complete(const ChatRequest& request) = 0;
};

using BackendPtr = std::shared_ptr<LlmBackend>;

} // namespace openti::llm
