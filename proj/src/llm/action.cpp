// SPDX-License-Identifier: Apache-2.0
#include <openti/core/text.hpp>
#include <openti/llm/action.hpp>

namespace openti::llm
{

namespace
{

std::string strip_thought_label(std::string_view text)
{
    auto t = trim(text);
    if (starts_with_ci(t, "thought:"))
        t = trim(std::string_view(t).substr(8));
    return t;
}

} // namespace

std::string_view to_string(ActionKind kind) noexcept
{
    switch (kind)
    {
        case ActionKind::tool_call: return "tool_call";
        case ActionKind::final_answer: return "final_answer";
        case ActionKind::parse_failure: return "parse_failure";
    }
    return "parse_failure";
}

AgentAction AgentAction::tool_call(std::string name, nlohmann::json args)
{
    AgentAction a;
    a.kind = ActionKind::tool_call;
    a.tool_name = std::move(name);
    a.arguments = std::move(args);
    a.raw = serialize(a);
    return a;
}

AgentAction AgentAction::final_answer(std::string text)
{
    AgentAction a;
    a.kind = ActionKind::final_answer;
    a.answer = std::move(text);
    a.raw = serialize(a);
    return a;
}

namespace
{

// End index (exclusive) of the balanced object starting at `open`, honoring
// JSON string literals; npos if unbalanced.
std::size_t match_object(std::string_view s, std::size_t open) noexcept
{
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = open; i < s.size(); ++i)
    {
        const char c = s[i];
        if (in_string)
        {
            if (escaped)
                escaped = false;
            else if (c == '\\')
                escaped = true;
            else if (c == '"')
                in_string = false;
            continue;
        }
        if (c == '"')
            in_string = true;
        else if (c == '{')
            ++depth;
        else if (c == '}' && --depth == 0)
            return i + 1;
    }
    return std::string_view::npos;
}

bool classify(const nlohmann::json& obj, AgentAction& out)
{
    if (!obj.is_object() || !obj.contains("action") || !obj["action"].is_string())
        return false;
    auto name = obj["action"].get<std::string>();
    if (name.empty())
        return false;
    if (name == "final")
    {
        if (!obj.contains("answer") || !obj["answer"].is_string())
            return false;
        out.kind = ActionKind::final_answer;
        out.answer = obj["answer"].get<std::string>();
        return true;
    }
    if (!obj.contains("action_input") || !obj["action_input"].is_object())
        return false;
    out.kind = ActionKind::tool_call;
    out.tool_name = std::move(name);
    out.arguments = obj["action_input"];
    return true;
}

} // namespace

AgentAction parse_action(std::string_view completion) noexcept
{
    AgentAction out;
    try
    {
        out.raw = std::string(completion);
        for (auto open = completion.find('{'); open != std::string_view::npos; open = completion.find('{', open + 1))
        {
            const auto end = match_object(completion, open);
            if (end == std::string_view::npos)
                continue;
            auto doc = nlohmann::json::parse(completion.substr(open, end - open), nullptr, false);
            if (doc.is_discarded())
                continue;
            AgentAction candidate;
            if (classify(doc, candidate))
            {
                candidate.raw = out.raw;
                candidate.thought = strip_thought_label(completion.substr(0, open));
                return candidate;
            }
        }
        out.thought = trim(completion);
    }
    catch (...)
    {
        // allocation failure is the only way here; still honor totality
        out.kind = ActionKind::parse_failure;
    }
    return out;
}

std::string serialize(const AgentAction& action)
{
    switch (action.kind)
    {
        case ActionKind::tool_call:
            return nlohmann::json {{"action", action.tool_name}, {"action_input", action.arguments}}.dump();
        case ActionKind::final_answer:
            return nlohmann::json {{"action", "final"}, {"answer", action.answer}}.dump();
        case ActionKind::parse_failure: return action.raw;
    }
    return action.raw;
}

bool looks_structured(std::string_view completion) noexcept
{
    return completion.find('{') != std::string_view::npos;
}

std::string_view action_grammar() noexcept
{
    return R"(Respond with exactly one JSON object and nothing else that looks like JSON.
To use a tool:   {"action": "<tool name>", "action_input": {<parameter>: <value>, ...}}
To answer the user directly: {"action": "final", "answer": "<text>"}
After a tool runs you receive its observation; then either call another tool or give the final answer.)";
}

} // namespace openti::llm
