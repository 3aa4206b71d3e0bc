// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <openti/llm/chat.hpp>
#include <openti/sim/controller.hpp>
#include <openti/sim/metrics.hpp>
#include <openti/sim/scenario.hpp>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace openti::chatzero
{

struct PolicyBrief
{
    std::string objective;
    std::vector<std::string> constraints;
    std::string action_space_doc;

    /// Throws InvalidArgument: empty objective or action_space_doc.
    void validate() const;
    /// Prompt block handed to the control agent.
    [[nodiscard]] std::string to_text() const;
    [[nodiscard]] nlohmann::json to_json() const;
    /// Throws SchemaError (details: field).
    static PolicyBrief from_json(const nlohmann::json& j);
};

struct ZeroStepResult
{
    sim::TscAction action;
    std::string explanation;
    bool fallback_used = false;
};

/// One line per phase: "Phase k: green for <approach list>" with compass
/// origins of each approach link.
std::string action_space_doc(const network::SignalizedIntersection& intersection, const network::RoadNetwork& net);

/// Phase table of the first intersection; every default plan shares its indices.
/// Throws InvalidArgument when the network has no signalized intersection.
std::string action_space_doc(const network::RoadNetwork& net);

/// One LLM call asking for `{"objective": ..., "constraints": [...]}`, one
/// repair turn, then ExtractionFailure. InvalidArgument on empty text.
PolicyBrief describe_policy(const std::string& user_text, llm::LlmBackend& llm, const std::string& action_space_doc,
                            const std::string& model_id = "");

/// Observation JSON as sent to the agent: queues, current phase, time in
/// phase and, per phase, the approach indices it serves.
nlohmann::json observation_json(const sim::TscObservation& obs, const network::SignalizedIntersection& intersection);

/// The agent answers `PHASE: <k>` plus a one-sentence reason. An unparseable
/// or out-of-range answer gets one repair turn; after that the current phase
/// is kept with fallback_used set. Backend errors count as failed attempts.
ZeroStepResult zero_step(const sim::TscObservation& obs, const network::SignalizedIntersection& intersection,
                         const PolicyBrief& brief, llm::LlmBackend& llm, const std::string& model_id = "");

/// Index after "PHASE:" in `answer`, if any.
std::optional<int> parse_phase(const std::string& answer);

/// Deterministic control agent: reads the observation from the prompt and
/// picks the phase with the largest served queue sum, lowest index on ties.
class GreedySurrogateBackend final : public llm::LlmBackend
{
public:
    [[nodiscard]] std::string name() const override { return "greedy-surrogate"; }

private:
    llm::ChatResponse do_complete(const llm::ChatRequest& request) override;
};

/// Phase serving the largest queue sum at `obs`, lowest index on ties.
int greedy_phase(const sim::TscObservation& obs, const network::SignalizedIntersection& intersection);

struct LogEntry
{
    int t = 0;
    std::int64_t intersection = 0;
    nlohmann::json obs;
    int action = 0;
    std::string explanation;
    bool fallback = false;

    [[nodiscard]] nlohmann::json to_json() const;
};

class ChatZeroController final : public sim::SignalController
{
public:
    ChatZeroController(PolicyBrief brief, llm::LlmBackend& llm, std::string model_id = "");

    [[nodiscard]] std::string name() const override { return "chatzero"; }
    void begin_episode(const sim::Scenario& scenario) override;
    sim::TscAction act(const sim::TscObservation& obs, const network::SignalizedIntersection& intersection) override;

    [[nodiscard]] const std::vector<LogEntry>& log() const noexcept { return _log; }
    [[nodiscard]] int fallbacks() const noexcept { return _fallbacks; }

private:
    PolicyBrief _brief;
    llm::LlmBackend& _llm;
    std::string _model;
    std::vector<LogEntry> _log;
    int _fallbacks = 0;
};

struct ChatZeroRun
{
    sim::MetricsReport metrics;
    std::vector<LogEntry> log;
    double fallback_rate = 0.0; // fallbacks / decision steps, 0 with no steps
    std::filesystem::path log_path; // chatzero_log.jsonl when out_dir was given
};

ChatZeroRun run_chatzero(const sim::Scenario& scenario, const PolicyBrief& brief, llm::LlmBackend& agent,
                         const std::string& model_id = "", const std::optional<std::filesystem::path>& out_dir = {});

void write_log_jsonl(const std::vector<LogEntry>& log, const std::filesystem::path& path);

} // namespace openti::chatzero
