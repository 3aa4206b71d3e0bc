// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <openti/agent/dispatcher.hpp>
#include <openti/agent/registry.hpp>
#include <openti/llm/chat.hpp>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace openti::eval
{

using Outcome = agent::DispatchStatus;

struct TaskCase
{
    std::string task_id; // "1".."6" for the comparison battery, the tool name for ablation tasks
    std::string utterance;
    std::string expected_tool;
    std::optional<nlohmann::json> expected_params; // partial map, compared key by key

    [[nodiscard]] nlohmann::json to_json() const;
    /// Throws SchemaError (details: field).
    static TaskCase from_json(const nlohmann::json& j);
};

/// JSON list of TaskCase. Throws IoError, SchemaError; InvalidArgument when
/// an expected tool is not in `registry` (if given).
std::vector<TaskCase> load_battery(const std::filesystem::path& path, const agent::ToolRegistry* registry = nullptr);
void save_battery(const std::vector<TaskCase>& battery, const std::filesystem::path& path);

/// The six compared tasks, resolving paths against the bundled data directory.
std::vector<TaskCase> comparison_battery();
/// queryAreaRange, showOnMap, autoDownloadOpenStreetMapFile, simulateOnLibsignal.
std::vector<TaskCase> ablation_battery();

struct EvalRecord
{
    std::string task_id;
    int trial = 0;
    Outcome outcome = Outcome::error_raise;
    std::string matched_tool;
    nlohmann::json transcript; // the dispatch outcome as JSON

    [[nodiscard]] nlohmann::json to_json() const;
    static EvalRecord from_json(const nlohmann::json& j);
};

/// Dispatch status, demoted to error_raise when the expected tool ran with
/// parameters that differ from the expected ones.
Outcome classify(const agent::DispatchOutcome& outcome, const TaskCase& task);
/// Same rule on a stored transcript (DispatchOutcome::to_json).
Outcome classify(const nlohmann::json& transcript, const TaskCase& task);

/// Backend for one trial; a fresh instance per trial keeps replays independent.
using BackendFactory = std::function<llm::BackendPtr(const TaskCase& task, int trial)>;

struct BatteryConfig
{
    std::filesystem::path workspace; // sessions/<id>/ per trial
    agent::AgentConfig agent;
    agent::AblationMask mask;
    std::string session_prefix = "eval";
};

/// Dispatches every case `trials` times with the case's expected tool
/// declared. Failures are outcomes, never exceptions.
std::vector<EvalRecord> run_battery(const std::vector<TaskCase>& battery, int trials,
                                    std::shared_ptr<const agent::ToolRegistry> registry, const BackendFactory& backend,
                                    const BatteryConfig& config);

struct TaskRates
{
    std::string task_id;
    int n = 0;       // trials
    int c_no = 0;
    int c_miss = 0;
    int c_error = 0;
    [[nodiscard]] int errors() const noexcept { return c_no + c_miss + c_error; }
    [[nodiscard]] double rho_no() const noexcept { return static_cast<double>(c_no) / n; }
    [[nodiscard]] double rho_miss() const noexcept { return static_cast<double>(c_miss) / n; }
    [[nodiscard]] double rho_error() const noexcept { return static_cast<double>(c_error) / n; }
    [[nodiscard]] double rate() const noexcept { return static_cast<double>(errors()) / n; }
};

struct EvalReport
{
    int T = 0;
    int n_c = 0;
    std::vector<TaskRates> tasks; // first-appearance order
    double rho_no = 0.0;
    double rho_miss = 0.0;
    double rho_error = 0.0;
    double aggregate = 0.0; // (1/T) sum of n_e / n_c

    [[nodiscard]] nlohmann::json to_json() const;
};

/// Throws InvalidArgument (no records), UnevenTrials (tasks with different trial counts).
EvalReport error_rates(const std::vector<EvalRecord>& records);

void write_eval_report(const EvalReport& report, const std::vector<EvalRecord>& records,
                       const std::filesystem::path& path);

/// Replayed trials: per key a list of trials, each {label, completions:[...]}.
/// Keys are task ids for the comparison battery and "<step>/<tool>" for ablation.
class ReplayLibrary
{
public:
    static ReplayLibrary from_file(const std::filesystem::path& path);
    static ReplayLibrary from_json(const nlohmann::json& doc);

    [[nodiscard]] llm::BackendPtr backend(const std::string& key, int trial) const;
    /// Hand label stored with the trial ("ok", "no_api_call", ...).
    [[nodiscard]] Outcome label(const std::string& key, int trial) const;
    [[nodiscard]] int trials(const std::string& key) const;
    [[nodiscard]] const std::string& system() const noexcept { return _system; }

private:
    struct Trial
    {
        Outcome label;
        std::vector<std::string> completions;
    };
    const Trial& at(const std::string& key, int trial) const;
    std::string _system;
    std::map<std::string, std::vector<Trial>> _trials;
};

struct AblationTable
{
    std::vector<std::string> rows;    // "none", "-Emphasis", "-Emphasis -Reflection", ...
    std::vector<std::string> columns; // task ids
    std::vector<std::vector<double>> accuracy;

    [[nodiscard]] std::string to_csv() const;
    [[nodiscard]] double at(const std::string& row, const std::string& column) const;
};

/// The removal order of the ablation study.
std::vector<agent::PromptField> default_removal_order();

using AblationBackendFactory = std::function<llm::BackendPtr(int step, const TaskCase& task, int trial)>;

/// Row 0 has no mask; row k removes the first k components of `order`.
/// Throws InvalidArgument unless `order` is a permutation of the five fields.
AblationTable ablate(const std::vector<TaskCase>& battery, int trials, const std::vector<agent::PromptField>& order,
                     std::shared_ptr<const agent::ToolRegistry> registry, const AblationBackendFactory& backend,
                     const BatteryConfig& config);

/// Deterministic heatmap: rows are masks, columns tasks, darker is higher accuracy.
std::string render_ablation_svg(const AblationTable& table);

struct AblationArtifacts
{
    std::filesystem::path csv;
    std::filesystem::path svg;
};
AblationArtifacts write_ablation(const AblationTable& table, const std::filesystem::path& out_dir);

} // namespace openti::eval
