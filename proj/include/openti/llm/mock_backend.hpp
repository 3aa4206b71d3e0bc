// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <openti/llm/chat.hpp>

#include <regex>
#include <string>
#include <vector>

namespace openti::llm
{

/// One scripted rule. `responses[k]` answers the k-th assistant turn after the
/// matched user message; the last entry repeats once the list runs out.
struct ScriptRule
{
    std::string pattern;
    std::vector<std::string> responses;
};

/// Deterministic offline backend. Rules are tried in order against the last
/// user message with a case-insensitive regex search; the first hit answers.
/// A request no rule matches raises ScriptMiss: an incomplete fixture is a
/// test bug, never something to paper over.
class MockBackend final : public LlmBackend
{
public:
    explicit MockBackend(std::vector<ScriptRule> rules);

    /// JSON list of {pattern, response} or {pattern, responses:[...]}.
    static MockBackend from_json(const nlohmann::json& doc);
    static MockBackend from_file(const std::string& path);

    [[nodiscard]] std::string name() const override { return "mock"; }
    [[nodiscard]] std::size_t rule_count() const noexcept { return _rules.size(); }

private:
    ChatResponse do_complete(const ChatRequest& request) override;

    struct CompiledRule
    {
        ScriptRule rule;
        std::regex regex;
    };
    std::vector<CompiledRule> _rules;
};

} // namespace openti::llm
