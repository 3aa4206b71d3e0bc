// SPDX-License-Identifier: Apache-2.0
#include <openti/core/error.hpp>
#include <openti/llm/chat.hpp>

#include <cctype>

namespace openti::llm
{

std::string_view to_string(Role role) noexcept
{
    switch (role)
    {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
        case Role::tool: return "tool";
    }
    return "user";
}

Role role_from_string(std::string_view s)
{
    if (s == "system")
        return Role::system;
    if (s == "user")
        return Role::user;
    if (s == "assistant")
        return Role::assistant;
    if (s == "tool")
        return Role::tool;
    fail(Errc::InvalidArgument, "unknown chat role '" + std::string(s) + "'");
}

std::string_view to_string(FinishReason reason) noexcept
{
    switch (reason)
    {
        case FinishReason::stop: return "stop";
        case FinishReason::length: return "length";
        case FinishReason::error: return "error";
    }
    return "error";
}

void ChatRequest::validate() const
{
    require(!messages.empty(), "chat request has no messages");
    require(messages.front().role == Role::system || messages.front().role == Role::user,
            "first chat message must be system or user");
    require(temperature >= 0.0 && temperature <= 1.0, "temperature must lie in [0, 1]");
    require(max_tokens > 0, "max_tokens must be positive");
}

std::string_view ChatRequest::last_user_message() const noexcept
{
    for (auto it = messages.rbegin(); it != messages.rend(); ++it)
        if (it->role == Role::user)
            return it->content;
    return {};
}

std::size_t ChatRequest::assistant_turns_since_user() const noexcept
{
    std::size_t n = 0;
    for (auto it = messages.rbegin(); it != messages.rend(); ++it)
    {
        if (it->role == Role::user)
            break;
        if (it->role == Role::assistant)
            ++n;
    }
    return n;
}

nlohmann::json ChatRequest::to_openai_json() const
{
    nlohmann::json msgs = nlohmann::json::array();
    for (const auto& m: messages)
    {
        // Plain chat-completions has no tool_call_id to pair with, so tool
        // observations travel as user turns with a marker.
        if (m.role == Role::tool)
            msgs.push_back({{"role", "user"}, {"content", "Observation: " + m.content}});
        else
            msgs.push_back({{"role", to_string(m.role)}, {"content", m.content}});
    }
    return {{"model", model_id}, {"messages", std::move(msgs)}, {"temperature", temperature}, {"max_tokens", max_tokens}};
}

int approx_tokens(std::string_view text) noexcept
{
    int n = 0;
    bool in_word = false;
    for (unsigned char c: text)
    {
        const bool space = std::isspace(c) != 0;
        if (!space && !in_word)
            ++n;
        in_word = !space;
    }
    return n;
}

ChatResponse LlmBackend::complete(const ChatRequest& request)
{
    request.validate();
    return do_complete(request);
}

} // namespace openti::llm
