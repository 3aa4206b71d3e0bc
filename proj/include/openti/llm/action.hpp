// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <string_view>

namespace openti::llm
{

enum class ActionKind
{
    tool_call,
    final_answer,
    parse_failure,
};

std::string_view to_string(ActionKind kind) noexcept;

/// A model completion reduced to what the dispatcher acts on.
struct AgentAction
{
    ActionKind kind = ActionKind::parse_failure;
    std::string tool_name;                                    // tool_call only
    nlohmann::json arguments = nlohmann::json::object();      // tool_call only
    std::string answer;                                       // final_answer only
    std::string raw;                                          // always the full completion
    std::string thought;                                      // prose preceding the action object

    static AgentAction tool_call(std::string name, nlohmann::json args);
    static AgentAction final_answer(std::string text);
};

/// Extracts the first well-formed action object anywhere in `completion`:
///   {"action": "<tool>", "action_input": {...}}   -> tool_call
///   {"action": "final", "answer": "<text>"}       -> final_answer
/// Anything else yields parse_failure with `raw` preserved. Never throws.
AgentAction parse_action(std::string_view completion) noexcept;

/// Canonical single-object form accepted by parse_action.
std::string serialize(const AgentAction& action);

/// True if the completion contains an opening brace, i.e. the model attempted
/// structured output rather than answering in prose.
bool looks_structured(std::string_view completion) noexcept;

/// The action grammar text embedded in every system prompt and repair turn.
std::string_view action_grammar() noexcept;

} // namespace openti::llm
