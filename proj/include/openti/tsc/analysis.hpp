// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <openti/llm/chat.hpp>
#include <openti/sim/metrics.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace openti::tsc
{

struct MetricDelta
{
    std::string metric; // att_s, throughput, avg_queue, avg_delay_s, total_reward
    double a = 0.0;
    double b = 0.0;
    double delta = 0.0;  // b - a
    std::string better;  // "a", "b" or "tie"
};

struct LogAnalysis
{
    sim::MetricsReport a;
    std::optional<sim::MetricsReport> b;
    std::vector<MetricDelta> rows; // comparison mode only
    std::string verdict;           // "a", "b" or "tie" (comparison mode); empty otherwise
    std::string text;
};

/// True when larger values of `metric` are better (throughput, reward).
bool larger_is_better(std::string_view metric);

/// A metrics.json, a training_curve.csv (its last episode) or a directory
/// holding either. Throws UnreadableLog, SchemaError.
sim::MetricsReport load_log(const std::filesystem::path& path);

/// Summary of one log, or per-metric deltas (b - a) with a winner each and
/// an overall verdict by majority of metric wins.
LogAnalysis analyze_logs(const std::filesystem::path& a, const std::optional<std::filesystem::path>& b = std::nullopt);

/// Plain-language rendering of every metric. With a backend, one completion
/// is appended under a model-generated label.
std::string explain_result(const sim::MetricsReport& report, llm::LlmBackend* llm = nullptr,
                           const std::string& model_id = "gpt-3.5-turbo");

} // namespace openti::tsc
