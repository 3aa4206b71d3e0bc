// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>

namespace openti::sim
{

struct MetricsReport
{
    double att_s = 0.0;
    int throughput = 0;
    double avg_queue = 0.0;
    double avg_delay_s = 0.0;
    double total_reward = 0.0;
    std::map<std::int64_t, std::map<int, int>> per_link_counts; // link -> hour -> vehicles
    bool no_arrivals = false;

    [[nodiscard]] nlohmann::json to_json() const;
    /// Throws SchemaError naming the first missing or ill-typed field.
    static MetricsReport from_json(const nlohmann::json& j);

    friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

void write_metrics_json(const MetricsReport& report, const std::filesystem::path& path);
/// Throws IoError, SchemaError.
MetricsReport read_metrics_json(const std::filesystem::path& path);

} // namespace openti::sim
