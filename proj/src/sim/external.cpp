// SPDX-License-Identifier: Apache-2.0
#include <openti/core/error.hpp>
#include <openti/core/process.hpp>
#include <openti/sim/external.hpp>

namespace openti::sim
{

ExternalRun run_external(const Scenario& scenario, const AdapterConfig& config)
{
    require(!config.executable.empty(), "no external simulator adapter configured");
    require(!config.work_dir.empty(), "adapter work directory is empty");
    ExternalRun r;
    r.scenario_dir = config.work_dir / "scenario";
    r.output_dir = config.work_dir / "output";
    write_scenario_dir(scenario, r.scenario_dir);
    std::filesystem::create_directories(r.output_dir);
    std::filesystem::remove(r.output_dir / "metrics.json");

    std::vector<std::string> argv {config.executable};
    argv.insert(argv.end(), config.args.begin(), config.args.end());
    argv.push_back(r.scenario_dir.string());
    argv.push_back(r.output_dir.string());
    ProcessResult p;
    try
    {
        p = run_process(argv);
    }
    catch (const Error& e)
    {
        fail(Errc::BackendError, "cannot start adapter '" + config.executable + "': " + e.what());
    }
    r.log = p.output;
    if (p.exit_code != 0)
        fail(Errc::BackendError, "adapter exited with status " + std::to_string(p.exit_code) + ": " + p.output,
             {std::to_string(p.exit_code), p.output});
    const auto metrics = r.output_dir / "metrics.json";
    if (!std::filesystem::exists(metrics))
        fail(Errc::SchemaError, "adapter wrote no metrics.json", {"metrics.json"});
    r.metrics = read_metrics_json(metrics);
    return r;
}

} // namespace openti::sim
