// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <openti/agent/registry.hpp>
#include <openti/agent/session.hpp>
#include <openti/llm/chat.hpp>

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace openti::agent
{

enum class DispatchStatus
{
    ok,
    no_api_call,
    mismatch,
    error_raise,
};

std::string_view to_string(DispatchStatus status) noexcept;
DispatchStatus dispatch_status_from_string(std::string_view s);

struct ToolCallRecord
{
    std::string tool;
    nlohmann::json params; // validated params, or the raw arguments when validation failed
    bool succeeded = false;
    std::string observation;
};

struct DispatchOutcome
{
    DispatchStatus status = DispatchStatus::error_raise;
    std::string reply;
    std::optional<std::string> matched_tool;
    int retries_used = 0;     // max of the two budgets below, so never above max_query
    int response_retries = 0; // repairs for unparseable output, unknown tools and handler errors
    int param_retries = 0;    // "Alert Required Info" turns
    int llm_calls = 0;
    std::vector<ToolCallRecord> calls;
    std::vector<Attachment> attachments;
    std::string failure_reason;

    [[nodiscard]] nlohmann::json to_json() const;
};

struct AgentConfig
{
    std::string model_id = "gpt-3.5-turbo";
    int max_query = 3;
    std::filesystem::path data_dir;
    bool offline = true;
    std::uint64_t seed = 0;
    llm::BackendPtr tool_llm; // handed to tools that narrate results; may be null
};

struct DispatchOptions
{
    /// The caller knows a tool is needed: a direct answer is no_api_call.
    bool require_tool = false;
    /// The tool the request is about. Implies require_tool; a chain that never
    /// reaches it ends as mismatch.
    std::optional<std::string> expected_tool;
    AblationMask mask;
    std::optional<int> max_query;
};

/// The pivotal agent: renders the catalog, runs the model, validates and
/// executes tool calls, and feeds observations back until a final answer.
class Agent
{
public:
    Agent(std::shared_ptr<const ToolRegistry> registry, llm::BackendPtr backend, AgentConfig config = {});

    /// Serialized per session. Never throws for model or tool failures; those
    /// become statuses.
    DispatchOutcome dispatch(Session& session, std::string_view msg, const DispatchOptions& options = {});

    [[nodiscard]] const ToolRegistry& registry() const noexcept { return *_registry; }
    [[nodiscard]] const AgentConfig& config() const noexcept { return _config; }

private:
    std::shared_ptr<const ToolRegistry> _registry;
    llm::BackendPtr _backend;
    AgentConfig _config;
};

} // namespace openti::agent
