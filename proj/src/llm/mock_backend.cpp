// SPDX-License-Identifier: Apache-2.0
#include <openti/core/error.hpp>
#include <openti/core/text.hpp>
#include <openti/llm/mock_backend.hpp>

#include <algorithm>

namespace openti::llm
{

MockBackend::MockBackend(std::vector<ScriptRule> rules)
{
    _rules.reserve(rules.size());
    for (auto& r: rules)
    {
        require(!r.responses.empty(), "mock rule '" + r.pattern + "' has no response");
        std::regex re;
        try
        {
            re = std::regex(r.pattern, std::regex::ECMAScript | std::regex::icase);
        }
        catch (const std::regex_error& e)
        {
            fail(Errc::InvalidArgument, "bad mock pattern '" + r.pattern + "': " + e.what());
        }
        _rules.push_back({std::move(r), std::move(re)});
    }
}

MockBackend MockBackend::from_json(const nlohmann::json& doc)
{
    require(doc.is_array(), "mock script must be a JSON list");
    std::vector<ScriptRule> rules;
    for (const auto& item: doc)
    {
        require(item.is_object() && item.contains("pattern") && item["pattern"].is_string(),
                "mock script entries need a string 'pattern'");
        ScriptRule rule {item["pattern"].get<std::string>(), {}};
        if (item.contains("responses"))
            rule.responses = item["responses"].get<std::vector<std::string>>();
        else if (item.contains("response"))
            rule.responses.push_back(item["response"].get<std::string>());
        rules.push_back(std::move(rule));
    }
    return MockBackend(std::move(rules));
}

MockBackend MockBackend::from_file(const std::string& path)
{
    const auto text = read_file(path);
    auto doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded())
        fail(Errc::InvalidArgument, "mock script " + path + " is not valid JSON");
    return from_json(doc);
}

ChatResponse MockBackend::do_complete(const ChatRequest& request)
{
    const std::string message(request.last_user_message());
    for (const auto& compiled: _rules)
    {
        if (!std::regex_search(message, compiled.regex))
            continue;
        const auto& responses = compiled.rule.responses;
        const auto k = std::min(request.assistant_turns_since_user(), responses.size() - 1);
        ChatResponse out;
        out.content = responses[k];
        out.finish_reason = FinishReason::stop;
        int prompt = 0;
        for (const auto& m: request.messages)
            prompt += approx_tokens(m.content);
        out.usage = {prompt, approx_tokens(out.content)};
        return out;
    }
    fail(Errc::ScriptMiss, "no mock rule matches: \"" + message.substr(0, 120) + "\"");
}

} // namespace openti::llm
