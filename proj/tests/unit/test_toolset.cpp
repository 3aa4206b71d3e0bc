// SPDX-License-Identifier: Apache-2.0
#include "support.hpp"

#include <doctest.h>

#include <openti/core/error.hpp>
#include <openti/core/text.hpp>
#include <openti/demand/optimize.hpp>
#include <openti/network/gmns.hpp>
#include <openti/network/synthetic.hpp>
#include <openti/sim/synthetic.hpp>
#include <openti/toolset/toolset.hpp>

#include <filesystem>

using namespace openti;
using namespace openti::agent;
using openti::test::TempDir;
namespace fs = std::filesystem;

namespace
{

struct Harness
{
    TempDir dir;
    std::shared_ptr<ToolRegistry> reg = toolset::make_registry();
    ToolContext ctx;

    Harness()
    {
        ctx.artifacts_dir = dir.path() / "artifacts";
        ctx.data_dir = openti::test::data_dir();
        ctx.offline = true;
        fs::create_directories(ctx.artifacts_dir);
    }

    ToolResult run(const std::string& tool, const nlohmann::json& args)
    {
        const auto* t = reg->find(tool);
        REQUIRE(t != nullptr);
        const auto params = extract_params(t->descriptor, llm::AgentAction::tool_call(tool, args));
        return t->handler(params, ctx);
    }
};

} // namespace

TEST_CASE("registry holds the twelve catalog tools plus the auxiliary one")
{
    auto reg = toolset::make_registry();
    CHECK(reg->size() == 13);
    const auto& names = toolset::catalog_tool_names();
    REQUIRE(names.size() == 12);
    for (std::size_t i = 0; i < names.size(); ++i)
    {
        CHECK(reg->tools()[i].descriptor.name == names[i]);
        CHECK_FALSE(toolset::is_auxiliary(names[i]));
    }
    CHECK(toolset::is_auxiliary("visualizeTrainingCurves"));
    for (const auto& t: reg->tools())
        for (auto f: kPromptFields)
            CHECK_MESSAGE(!t.descriptor.field(f).empty(), t.descriptor.name << " " << label(f));
}

TEST_CASE("geo tools run offline on the bundled fixtures")
{
    Harness h;
    CHECK(h.run("queryAreaRange", {{"place", "Arizona State University, Tempe Campus"}}).text ==
          "[-111.9431, 33.4154, -111.9239, 33.428]");
    CHECK_THROWS_AS(h.run("queryAreaRange", {{"place", "zzqx-nonexistent-place-99"}}), Error);

    const auto map = h.run("showOnMap", {{"place", "Arizona State University, Tempe Campus"}});
    REQUIRE(map.attachments.size() == 2);
    CHECK(fs::exists(map.attachments[0].target));
    CHECK(map.attachments[1].target == "https://www.openstreetmap.org/?bbox=-111.9431,33.4154,-111.9239,33.428");
    CHECK_THROWS_AS(h.run("showOnMap", nlohmann::json::object()), Error);

    const auto dl = h.run("autoDownloadOpenStreetMapFile", {{"bbox", {-111.9431, 33.4154, -111.9239, 33.428}}});
    REQUIRE(dl.attachments.size() == 1);
    const auto osm = fs::path(dl.attachments[0].target);
    CHECK(fs::exists(osm));

    const auto filtered = h.run("networkFilter", {{"network", osm.filename().string()}, {"mode", "bike"}});
    CHECK(filtered.text.find("gmns_bike") != std::string::npos);
    const auto net_map = h.run("showOnMap", {{"network", "gmns_bike"}});
    CHECK(fs::exists(net_map.attachments[0].target));
}

TEST_CASE("demand and simulation tools chain through artifact paths")
{
    Harness h;
    const auto dl = h.run("autoDownloadOpenStreetMapFile", {{"bbox", "[-111.9431, 33.4154, -111.9239, 33.428]"}});
    const auto osm = fs::path(dl.attachments[0].target).filename().string();

    const auto gen = h.run("generateDemand", {{"network", osm}, {"total_vph", 300}, {"rows", 2}, {"cols", 2}});
    CHECK(fs::exists(h.ctx.artifacts_dir / "demand" / "demand.csv"));
    CHECK(fs::exists(h.ctx.artifacts_dir / "demand" / "zones.json"));
    CHECK(toolset::zone_shape_for(h.ctx.artifacts_dir / "demand" / "demand.csv", 4).rows == 2);

    const auto vis = h.run("visualizeDemand", {{"demand", "demand/demand.csv"}});
    REQUIRE(vis.attachments.size() == 1);
    CHECK(fs::exists(vis.attachments[0].target));

    const auto sumo = h.run("simulateOnSUMO", {{"network", osm}, {"demand", "demand/demand.csv"}});
    CHECK(sumo.text.find("ATT") != std::string::npos);
    CHECK(fs::exists(h.ctx.artifacts_dir / "sumo_run" / "metrics.json"));
    const auto dlsim = h.run("simulateOnDLSim", nlohmann::json::object());
    CHECK(fs::exists(h.ctx.artifacts_dir / "dlsim_run" / "metrics.json"));

    const auto fixed = h.run("simulateOnLibsignal", {{"algorithm", "fixedtime"}});
    const auto sotl = h.run("simulateOnLibsignal", {{"algorithm", "SOTL"}});
    const auto ql = h.run("simulateOnLibsignal", {{"algorithm", "qlearning"}, {"episodes", 3}});
    CHECK(fs::exists(h.ctx.artifacts_dir / "libsignal_qlearning" / "checkpoint.json"));
    CHECK_THROWS_AS(h.run("simulateOnLibsignal", {{"algorithm", "webster"}}), Error);

    const auto cmp = h.run("logAnalyzer", {{"log", "libsignal_fixedtime"}, {"compare", "libsignal_sotl"}});
    CHECK(cmp.text.find("ATT") != std::string::npos);
    CHECK(cmp.text.find("b better") != std::string::npos);
    const auto expl = h.run("resultExplainer", {{"metrics", "libsignal_sotl/metrics.json"}});
    CHECK_FALSE(expl.text.empty());
    const auto curves = h.run("visualizeTrainingCurves", {{"curve", "libsignal_qlearning"}});
    CHECK(fs::exists(curves.attachments[0].target));
}

TEST_CASE("demandOptimizer calibrates a GMNS corridor against counts")
{
    Harness h;
    const auto truth = sim::make_corridor_scenario(30, 20, 1, 0);
    network::to_gmns(truth.network, h.ctx.artifacts_dir / "corridor");
    auto seed = truth.od;
    seed.at(0, 1, 0) = 10;
    seed.at(1, 0, 0) = 10;
    demand::write_demand_csv(seed, h.ctx.artifacts_dir / "seed" / "demand.csv");
    write_file((h.ctx.artifacts_dir / "seed" / "zones.json").string(), R"({"rows": 1, "cols": 2})");
    demand::write_counts_csv(demand::simulate_counts(truth.od, {3, 4}, truth), h.ctx.artifacts_dir / "counts.csv");

    const auto r = h.run("demandOptimizer", {{"network", "corridor"},
                                             {"demand", "seed/demand.csv"},
                                             {"counts", "counts.csv"},
                                             {"generations", 15}});
    CHECK(r.attachments.size() == 3);
    const auto best = demand::read_demand_csv(h.ctx.artifacts_dir / "calibration" / "demand.csv");
    CHECK(std::abs(best.at(0, 1, 0) - 30) <= 3);
    CHECK(std::abs(best.at(1, 0, 0) - 20) <= 3);
}
