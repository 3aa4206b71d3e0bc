// SPDX-License-Identifier: Apache-2.0
#include <openti/agent/dispatcher.hpp>
#include <openti/core/error.hpp>
#include <openti/core/text.hpp>
#include <openti/llm/action.hpp>

#include <algorithm>

namespace openti::agent
{

std::string_view to_string(DispatchStatus status) noexcept
{
    switch (status)
    {
        case DispatchStatus::ok: return "ok";
        case DispatchStatus::no_api_call: return "no_api_call";
        case DispatchStatus::mismatch: return "mismatch";
        case DispatchStatus::error_raise: return "error_raise";
    }
    return "error_raise";
}

DispatchStatus dispatch_status_from_string(std::string_view s)
{
    for (auto st: {DispatchStatus::ok, DispatchStatus::no_api_call, DispatchStatus::mismatch,
                   DispatchStatus::error_raise})
        if (to_string(st) == s)
            return st;
    fail(Errc::InvalidArgument, "unknown dispatch status '" + std::string(s) + "'");
}

nlohmann::json DispatchOutcome::to_json() const
{
    nlohmann::json j;
    j["status"] = to_string(status);
    j["reply"] = reply;
    j["matched_tool"] = matched_tool ? nlohmann::json(*matched_tool) : nlohmann::json(nullptr);
    j["retries_used"] = retries_used;
    j["response_retries"] = response_retries;
    j["param_retries"] = param_retries;
    j["llm_calls"] = llm_calls;
    j["calls"] = nlohmann::json::array();
    for (const auto& c: calls)
        j["calls"].push_back(
            {{"tool", c.tool}, {"params", c.params}, {"succeeded", c.succeeded}, {"observation", c.observation}});
    j["failure_reason"] = failure_reason;
    return j;
}

Agent::Agent(std::shared_ptr<const ToolRegistry> registry, llm::BackendPtr backend, AgentConfig config)
    : _registry(std::move(registry))
    , _backend(std::move(backend))
    , _config(std::move(config))
{
    require(_registry && !_registry->empty(), "the agent needs a non-empty tool registry");
    require(static_cast<bool>(_backend), "the agent needs a language-model backend");
    require(_config.max_query >= 1, "max_query must be at least 1");
}

namespace
{

std::string observation_message(const ToolResult& result)
{
    std::string text = result.text;
    for (const auto& a: result.attachments)
        text += "\n[" + std::string(to_string(a.kind)) + "] " + (a.label.empty() ? a.target : a.label + ": " + a.target);
    return text;
}

std::string tool_names(const ToolRegistry& registry)
{
    std::vector<std::string> names;
    for (const auto& t: registry.tools())
        names.push_back(t.descriptor.name);
    return join(names, ", ");
}

std::string alert_required_info(const ToolDescriptor& tool, const Error& e)
{
    std::string text = "Alert Required Info. " + std::string(e.what()) + ". Expected parameters for " + tool.name + ":";
    for (const auto& p: tool.params)
        text += "\n- " + p.name + " (" + p.type_label() + (p.required ? ", required" : ", optional") + "): " + p.doc;
    if (!tool.format_restriction.empty())
        text += "\n" + tool.format_restriction;
    return text + "\nRe-read the user's request and emit the corrected action.";
}

} // namespace

DispatchOutcome Agent::dispatch(Session& session, std::string_view msg, const DispatchOptions& options)
{
    std::lock_guard dispatch_lock(session.dispatch_mutex());

    const int max_query = options.max_query.value_or(_config.max_query);
    require(max_query >= 1, "max_query must be at least 1");
    const bool need_tool = options.require_tool || options.expected_tool.has_value();
    const int call_cap = 1 + 2 * max_query;

    llm::ChatRequest request;
    request.model_id = _config.model_id;
    request.messages.push_back({llm::Role::system, render_system_prompt(_registry->catalog(), options.mask)});
    for (const auto& entry: session.transcript())
        request.messages.push_back({entry.speaker == Speaker::user ? llm::Role::user : llm::Role::assistant, entry.text});
    request.messages.push_back({llm::Role::user, std::string(msg)});
    session.add_transcript(Speaker::user, std::string(msg));

    ToolContext ctx {session.artifacts_dir(), _config.data_dir, _config.offline, _config.seed, _config.tool_llm};

    DispatchOutcome out;
    std::string last_success_signature;
    bool repaired_parse = false;
    bool repaired_unknown = false;

    auto succeeded_calls = [&] {
        return std::count_if(out.calls.begin(), out.calls.end(), [](const auto& c) { return c.succeeded; });
    };

    // Status for a chain that stopped with no further tool to run.
    auto settle = [&](std::string answer) {
        const bool any_success = succeeded_calls() > 0;
        auto attempted = [&](const std::string& name, bool success_only) {
            return std::any_of(out.calls.begin(), out.calls.end(), [&](const auto& c) {
                return c.tool == name && (!success_only || c.succeeded);
            });
        };
        if (options.expected_tool && !attempted(*options.expected_tool, true))
        {
            if (attempted(*options.expected_tool, false))
                out.status = DispatchStatus::error_raise;
            else if (!out.calls.empty())
                out.status = DispatchStatus::mismatch;
            else
                out.status = DispatchStatus::no_api_call;
        }
        else if (!any_success && !out.calls.empty())
            out.status = DispatchStatus::error_raise;
        else if (need_tool && !any_success)
            out.status = DispatchStatus::no_api_call;
        else
            out.status = DispatchStatus::ok;

        if (out.status == DispatchStatus::ok)
        {
            if (options.expected_tool)
                out.matched_tool = options.expected_tool;
            std::vector<std::string> parts;
            for (const auto& c: out.calls)
                if (c.succeeded && !c.observation.empty())
                    parts.push_back(c.observation);
            answer = trim(answer);
            if (!answer.empty() && std::find(parts.begin(), parts.end(), answer) == parts.end())
                parts.push_back(answer);
            out.reply = parts.empty() ? "Done." : join(parts, "\n\n");
        }
        else
        {
            out.failure_reason = out.status == DispatchStatus::no_api_call
                                     ? "the model answered without calling a tool"
                                     : (out.status == DispatchStatus::mismatch ? "the model called a tool that does not fit the request"
                                                                               : "the requested tool did not complete");
        }
    };

    auto fail_with = [&](DispatchStatus status, std::string reason) {
        out.status = status;
        out.failure_reason = std::move(reason);
    };

    // A tool kept failing until its budget ran out.
    auto exhausted = [&](const std::string& tool, std::string reason) {
        out.matched_tool = tool;
        if (!options.expected_tool)
            return fail_with(DispatchStatus::error_raise, std::move(reason));
        const auto& expected = *options.expected_tool;
        for (const auto& c: out.calls)
            if (c.tool == expected && c.succeeded)
                return settle("");
        const bool tried = std::any_of(out.calls.begin(), out.calls.end(), [&](const auto& c) { return c.tool == expected; });
        fail_with(tried ? DispatchStatus::error_raise : DispatchStatus::mismatch, std::move(reason));
    };

    while (true)
    {
        if (out.llm_calls >= call_cap)
        {
            settle("");
            if (out.status == DispatchStatus::ok && succeeded_calls() == 0)
                fail_with(DispatchStatus::error_raise, "query budget exhausted");
            break;
        }

        llm::ChatResponse response;
        try
        {
            ++out.llm_calls;
            response = _backend->complete(request);
        }
        catch (const std::exception& e)
        {
            session.append_trace(TraceKind::error, std::string("model call failed: ") + e.what());
            fail_with(DispatchStatus::error_raise, e.what());
            break;
        }
        request.messages.push_back({llm::Role::assistant, response.content});

        const auto action = llm::parse_action(response.content);
        if (!action.thought.empty())
            session.append_trace(TraceKind::thought, action.thought);

        if (action.kind == llm::ActionKind::parse_failure && !llm::looks_structured(action.raw))
        {
            settle(action.raw);
            break;
        }
        if (action.kind == llm::ActionKind::parse_failure)
        {
            session.append_trace(TraceKind::error, "could not parse an action from the model output");
            if (repaired_parse || out.response_retries >= max_query)
            {
                fail_with(DispatchStatus::error_raise, "unparseable model output after repair");
                break;
            }
            repaired_parse = true;
            ++out.response_retries;
            request.messages.push_back(
                {llm::Role::system,
                 "Your last reply did not contain a valid action object.\n" + std::string(llm::action_grammar())});
            continue;
        }
        repaired_parse = false;

        if (action.kind == llm::ActionKind::final_answer)
        {
            settle(action.answer);
            break;
        }

        const auto* tool = _registry->find(action.tool_name);
        if (!tool)
        {
            session.append_trace(TraceKind::error, "unknown tool '" + action.tool_name + "'", action.tool_name);
            if (repaired_unknown || out.response_retries >= max_query)
            {
                out.matched_tool = action.tool_name;
                fail_with(DispatchStatus::mismatch, "tool '" + action.tool_name + "' is not registered");
                break;
            }
            repaired_unknown = true;
            ++out.response_retries;
            request.messages.push_back({llm::Role::system, "There is no tool named '" + action.tool_name +
                                                               "'. Available tools: " + tool_names(*_registry) + "."});
            continue;
        }
        repaired_unknown = false;

        const auto signature = action.tool_name + action.arguments.dump();
        if (signature == last_success_signature)
        {
            settle("");
            break;
        }

        nlohmann::json params;
        try
        {
            params = extract_params(tool->descriptor, action);
        }
        catch (const Error& e)
        {
            session.append_trace(TraceKind::error, e.what(), action.tool_name);
            out.calls.push_back({action.tool_name, action.arguments, false, e.what()});
            if (out.param_retries >= max_query)
            {
                exhausted(action.tool_name, std::string("parameters still invalid: ") + e.what());
                break;
            }
            ++out.param_retries;
            request.messages.push_back({llm::Role::system, alert_required_info(tool->descriptor, e)});
            continue;
        }

        session.append_trace(TraceKind::action, params.dump(), action.tool_name);
        try
        {
            auto result = tool->handler(params, ctx);
            const auto obs = observation_message(result);
            session.append_trace(TraceKind::observation, obs, action.tool_name);
            for (const auto& a: result.attachments)
            {
                if (a.kind != Attachment::Kind::link)
                    session.add_artifact(a.target, a.kind, a.label);
                out.attachments.push_back(a);
            }
            out.calls.push_back({action.tool_name, params, true, result.text});
            out.matched_tool = action.tool_name;
            last_success_signature = signature;
            request.messages.push_back({llm::Role::tool, obs});
        }
        catch (const std::exception& e)
        {
            session.append_trace(TraceKind::error, e.what(), action.tool_name);
            out.calls.push_back({action.tool_name, params, false, e.what()});
            if (out.response_retries >= max_query)
            {
                exhausted(action.tool_name, std::string("tool failed: ") + e.what());
                break;
            }
            ++out.response_retries;
            request.messages.push_back({llm::Role::tool, std::string("Error: ") + e.what()});
            std::string reflect = "The tool call failed. Check the parameters against the tool description";
            if (!tool->descriptor.reflection.empty() && !options.mask.count(PromptField::reflection))
                reflect += ". " + tool->descriptor.reflection;
            request.messages.push_back({llm::Role::system, reflect + "."});
        }
    }

    out.retries_used = std::max(out.response_retries, out.param_retries);
    if (out.status != DispatchStatus::ok)
    {
        out.attachments.clear();
        out.reply = "Query failed (" + std::string(to_string(out.status)) + "): " + out.failure_reason + ".";
    }
    session.add_transcript(Speaker::agent, out.reply);
    return out;
}

} // namespace openti::agent
