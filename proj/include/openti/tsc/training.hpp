// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <openti/sim/metrics.hpp>
#include <openti/sim/scenario.hpp>
#include <openti/tsc/policy.hpp>

#include <filesystem>
#include <memory>
#include <vector>

namespace openti::tsc
{

struct EpisodeRecord
{
    int episode = 0;
    double total_reward = 0.0;
    double att_s = 0.0;
    int throughput = 0;
    double avg_queue = 0.0;
    double avg_delay_s = 0.0;

    static EpisodeRecord from_metrics(int episode, const sim::MetricsReport& m);
    friend bool operator==(const EpisodeRecord&, const EpisodeRecord&) = default;
};

struct TrainingCurve
{
    std::vector<EpisodeRecord> records; // episodes 0, 1, 2, ...

    [[nodiscard]] bool empty() const noexcept { return records.empty(); }
    [[nodiscard]] std::size_t size() const noexcept { return records.size(); }
    /// Throws InvalidArgument unless episodes run 0..n-1.
    void validate() const;
    friend bool operator==(const TrainingCurve&, const TrainingCurve&) = default;
};

/// `episode,total_reward,att_s,throughput,avg_queue,avg_delay_s`
void write_training_curve(const TrainingCurve& curve, const std::filesystem::path& path);
/// Throws UnreadableLog naming the offending line.
TrainingCurve read_training_curve(const std::filesystem::path& path);

struct TrainingResult
{
    std::shared_ptr<QLearningController> policy;
    TrainingCurve curve;
};

/// Each episode replays the same scenario from an empty network with
/// exploration seeded by scenario.seed + episode. Throws InvalidArgument,
/// InvalidSpec and simulator errors.
TrainingResult train_qlearning(const sim::Scenario& scenario, int episodes, const PolicySpec& spec);

/// Line chart of total reward and ATT per episode (`training_curve.svg`).
/// Throws EmptyCurve.
std::filesystem::path visualize_training(const TrainingCurve& curve, const std::filesystem::path& out_dir);
std::string render_training_svg(const TrainingCurve& curve);

struct ExperimentOutput
{
    TrainingCurve curve;
    sim::MetricsReport final_metrics;
    std::filesystem::path metrics_json;
    std::filesystem::path curve_csv;
    std::filesystem::path checkpoint; // qlearning only
};

/// Runs `episodes` episodes of a fixedtime/sotl/qlearning policy and writes
/// metrics.json (last episode), training_curve.csv and, for qlearning,
/// checkpoint.json into `out_dir`.
ExperimentOutput run_experiment(const sim::Scenario& scenario, const PolicySpec& spec, int episodes,
                                const std::filesystem::path& out_dir);

} // namespace openti::tsc
