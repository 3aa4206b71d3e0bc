// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <openti/sim/metrics.hpp>
#include <openti/sim/scenario.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace openti::sim
{

/// Subprocess contract for an external simulator: the adapter is invoked as
/// `executable args... <scenario_dir> <output_dir>` and must leave a
/// metrics.json in `output_dir` and exit 0.
struct AdapterConfig
{
    std::string executable;
    std::vector<std::string> args;
    std::filesystem::path work_dir; // scenario/ and output/ are created here
};

struct ExternalRun
{
    MetricsReport metrics;
    std::filesystem::path scenario_dir;
    std::filesystem::path output_dir;
    std::string log;
};

/// Throws InvalidArgument (no executable), BackendError (spawn failure or
/// nonzero exit, with captured output), SchemaError.
ExternalRun run_external(const Scenario& scenario, const AdapterConfig& config);

} // namespace openti::sim
