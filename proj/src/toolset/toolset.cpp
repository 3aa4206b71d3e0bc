// SPDX-License-Identifier: Apache-2.0
#include <openti/core/env.hpp>
#include <openti/core/error.hpp>
#include <openti/core/text.hpp>
#include <openti/demand/optimize.hpp>
#include <openti/geo/geo.hpp>
#include <openti/network/gmns.hpp>
#include <openti/network/osm.hpp>
#include <openti/sim/external.hpp>
#include <openti/sim/metrics.hpp>
#include <openti/sim/simulator.hpp>
#include <openti/sim/synthetic.hpp>
#include <openti/toolset/toolset.hpp>
#include <openti/tsc/analysis.hpp>
#include <openti/tsc/policy.hpp>
#include <openti/tsc/training.hpp>

#include <algorithm>
#include <cmath>

namespace openti::toolset
{

using agent::Attachment;
using agent::ParamSpec;
using agent::ParamType;
using agent::ToolContext;
using agent::ToolDescriptor;
using agent::ToolResult;
using nlohmann::json;
namespace fs = std::filesystem;

const std::vector<std::string>& catalog_tool_names()
{
    static const std::vector<std::string> names {
        "queryAreaRange", "showOnMap",       "autoDownloadOpenStreetMapFile", "simulateOnLibsignal",
        "networkFilter",  "generateDemand",  "simulateOnDLSim",               "simulateOnSUMO",
        "visualizeDemand", "logAnalyzer",    "resultExplainer",               "demandOptimizer"};
    return names;
}

const std::vector<std::string>& auxiliary_tool_names()
{
    static const std::vector<std::string> names {"visualizeTrainingCurves"};
    return names;
}

bool is_auxiliary(std::string_view name)
{
    const auto& aux = auxiliary_tool_names();
    return std::find(aux.begin(), aux.end(), name) != aux.end();
}

network::RoadNetwork load_network(const fs::path& path)
{
    if (!fs::exists(path))
        fail(Errc::IoError, "network path " + path.string() + " does not exist");
    if (fs::is_directory(path))
        return network::read_gmns(path);
    const auto name = to_lower(path.filename().string());
    if (name == "node.csv" || name == "link.csv")
        return network::read_gmns(path.parent_path());
    return network::parse_osm(path.string());
}

ZoneShape zone_shape_for(const fs::path& demand_csv, int zones)
{
    const auto meta = demand_csv.parent_path() / "zones.json";
    if (fs::exists(meta))
    {
        const auto j = json::parse(read_file(meta.string()), nullptr, false);
        if (!j.is_discarded() && j.contains("rows") && j.contains("cols"))
        {
            ZoneShape s {j.at("rows").get<int>(), j.at("cols").get<int>()};
            if (s.rows * s.cols == zones)
                return s;
        }
    }
    const int r = static_cast<int>(std::lround(std::sqrt(static_cast<double>(zones))));
    if (r * r == zones)
        return {r, r};
    return {1, zones};
}

namespace
{

// Zeroes OD pairs the network cannot connect and retries, reporting what was dropped.
sim::Scenario assemble_dropping(network::RoadNetwork net, demand::ODMatrix od, demand::ZoneGrid zones,
                                const sim::ScenarioSettings& settings, std::vector<std::string>* dropped)
{
    for (int guard = 0; guard <= od.zones() * od.zones(); ++guard)
    {
        try
        {
            return sim::assemble_scenario(net, od, zones, settings);
        }
        catch (const Error& e)
        {
            if (e.code() != Errc::UnreachablePair || e.details().size() < 2)
                throw;
            const int o = std::stoi(e.details()[0]);
            const int d = std::stoi(e.details()[1]);
            for (std::size_t h = 0; h < od.hour_count(); ++h)
                od.at(o, d, h) = 0.0;
            if (dropped)
                dropped->push_back(std::to_string(o) + "->" + std::to_string(d));
        }
    }
    fail(Errc::SimFailure, "could not route any demand on this network");
}

} // namespace

sim::Scenario build_scenario(const ScenarioInputs& in)
{
    if (!in.network)
    {
        if (in.demand)
            fail(Errc::InvalidArgument, "a demand file needs the network it was generated for");
        return sim::make_asymmetric_scenario(in.seed);
    }
    auto net = load_network(*in.network);
    sim::ScenarioSettings settings;
    settings.seed = in.seed;
    if (in.demand)
    {
        auto od = demand::read_demand_csv(*in.demand);
        const auto shape = zone_shape_for(*in.demand, od.zones());
        auto zones = demand::build_zones(net, shape.rows, shape.cols);
        return assemble_dropping(std::move(net), std::move(od), std::move(zones), settings, nullptr);
    }
    auto zones = demand::build_zones(net, 3, 3);
    auto od = demand::generate_demand(zones, in.total_vph, 1.0, {8});
    return assemble_dropping(std::move(net), std::move(od), std::move(zones), settings, nullptr);
}

namespace
{

std::string bbox_text(const BBox& b)
{
    return "[" + format_coord(b.min_lon) + ", " + format_coord(b.min_lat) + ", " + format_coord(b.max_lon) + ", " +
           format_coord(b.max_lat) + "]";
}

BBox bbox_param(const json& v)
{
    const auto a = v.get<std::array<double, 4>>();
    return BBox::from_array(a);
}

geo::GeoConfig geo_config(const ToolContext& ctx)
{
    auto cfg = geo::GeoConfig::from_env();
    cfg.offline = ctx.offline;
    if (!ctx.data_dir.empty())
        cfg.data_dir = ctx.data_dir;
    return cfg;
}

std::optional<fs::path> opt_path(const json& p, const char* name, const ToolContext& ctx)
{
    if (!p.contains(name) || p.at(name).is_null())
        return std::nullopt;
    return ctx.resolve(p.at(name).get<std::string>());
}

double opt_number(const json& p, const char* name, double fallback)
{
    return p.contains(name) && p.at(name).is_number() ? p.at(name).get<double>() : fallback;
}

int opt_int(const json& p, const char* name, int fallback)
{
    return p.contains(name) && p.at(name).is_number_integer() ? p.at(name).get<int>() : fallback;
}

std::string metrics_text(const sim::MetricsReport& m)
{
    return "ATT " + format_general(m.att_s) + " s, throughput " + std::to_string(m.throughput) + ", average queue " +
           format_general(m.avg_queue) + ", average delay " + format_general(m.avg_delay_s) + " s, total reward " +
           format_general(m.total_reward) + (m.no_arrivals ? " (no arrivals)" : "");
}

fs::path out_dir(const ToolContext& ctx, const std::string& name)
{
    const auto d = ctx.artifacts_dir / name;
    fs::create_directories(d);
    return d;
}

std::string rel(const ToolContext& ctx, const fs::path& p)
{
    std::error_code ec;
    const auto r = fs::relative(p, ctx.artifacts_dir, ec);
    return ec || r.empty() || r.native().rfind("..", 0) == 0 ? p.string() : r.generic_string();
}

ToolResult query_area_range(const json& p, ToolContext& ctx)
{
    return {bbox_text(geo::query_area_range(p.at("place").get<std::string>(), geo_config(ctx))), {}};
}

ToolResult show_on_map(const json& p, ToolContext& ctx)
{
    fs::create_directories(ctx.artifacts_dir);
    geo::MapArtifact map;
    if (auto net = opt_path(p, "network", ctx))
        map = geo::show_on_map(load_network(*net), ctx.artifacts_dir);
    else if (p.contains("bbox"))
        map = geo::show_on_map(bbox_param(p.at("bbox")), ctx.artifacts_dir);
    else if (p.contains("place"))
        map = geo::show_on_map(geo::query_area_range(p.at("place").get<std::string>(), geo_config(ctx)),
                               ctx.artifacts_dir);
    else
        fail(Errc::MissingParams, "showOnMap needs a place, a bbox or a network", {"place"});
    return {"Map of " + bbox_text(map.bbox) + " saved to " + rel(ctx, map.svg_path) + ". Open it online: " + map.share_link,
            {{Attachment::Kind::image, map.svg_path.string(), "map"}, {Attachment::Kind::link, map.share_link, "OpenStreetMap"}}};
}

ToolResult download_osm(const json& p, ToolContext& ctx)
{
    const auto file = geo::download_osm(bbox_param(p.at("bbox")), ctx.artifacts_dir, geo_config(ctx));
    return {"OpenStreetMap data saved to " + rel(ctx, file), {{Attachment::Kind::file, file.string(), "osm"}}};
}

ToolResult network_filter(const json& p, ToolContext& ctx)
{
    const auto net = load_network(ctx.resolve(p.at("network").get<std::string>()));
    const auto mode = network::mode_from_string(p.at("mode").get<std::string>());
    const auto r = network::filter_network(net, mode, ctx.artifacts_dir);
    return {"Filtered " + std::string(network::to_string(mode)) + " network (" + std::to_string(r.network.nodes().size()) +
                " nodes, " + std::to_string(r.network.links().size()) + " links) saved to " + rel(ctx, r.dir),
            {{Attachment::Kind::file, (r.dir / "link.csv").string(), "link.csv"},
             {Attachment::Kind::file, (r.dir / "node.csv").string(), "node.csv"}}};
}

ToolResult generate_demand(const json& p, ToolContext& ctx)
{
    const auto net = load_network(ctx.resolve(p.at("network").get<std::string>()));
    const int rows = opt_int(p, "rows", 3);
    const int cols = opt_int(p, "cols", 3);
    require(rows >= 1 && cols >= 1, "rows and cols must be at least 1");
    const int start = opt_int(p, "start_hour", 8);
    const int hours = opt_int(p, "hours", 1);
    require(start >= 0 && hours >= 1 && start + hours <= 24, "hours must lie within one day");
    std::vector<int> hv;
    for (int h = start; h < start + hours; ++h)
        hv.push_back(h);
    const auto zones = demand::build_zones(net, rows, cols);
    const auto od = demand::generate_demand(zones, opt_number(p, "total_vph", 600.0), opt_number(p, "beta", 1.0), hv);
    const auto dir = out_dir(ctx, "demand");
    const auto csv = dir / "demand.csv";
    demand::write_demand_csv(od, csv);
    write_file((dir / "zones.json").string(), json{{"rows", rows}, {"cols", cols}}.dump() + "\n");
    double total = 0.0;
    for (std::size_t h = 0; h < od.hour_count(); ++h)
        total += od.hour_total(h);
    return {"Demand for " + std::to_string(zones.size()) + " zones (" + format_general(total) + " trips) saved to " +
                rel(ctx, csv),
            {{Attachment::Kind::table, csv.string(), "demand.csv"}}};
}

ToolResult visualize_demand(const json& p, ToolContext& ctx)
{
    const auto od = demand::read_demand_csv(ctx.resolve(p.at("demand").get<std::string>()));
    const auto a = demand::visualize_demand(od, out_dir(ctx, "demand_plots"));
    ToolResult r;
    r.text = "Demand heatmaps for " + std::to_string(a.heatmaps.size()) + " hour(s):";
    for (std::size_t i = 0; i < a.heatmaps.size(); ++i)
    {
        r.text += " " + rel(ctx, a.heatmaps[i]);
        r.attachments.push_back({Attachment::Kind::image, a.heatmaps[i].string(), "hour " + std::to_string(od.hours()[i])});
    }
    return r;
}

ScenarioInputs inputs_from(const json& p, const ToolContext& ctx)
{
    ScenarioInputs in;
    in.network = opt_path(p, "network", ctx);
    in.demand = opt_path(p, "demand", ctx);
    in.seed = ctx.seed;
    return in;
}

ToolResult simulate_with(const json& p, ToolContext& ctx, const std::string& label, const char* adapter_env)
{
    const auto scenario = build_scenario(inputs_from(p, ctx));
    const auto dir = out_dir(ctx, label + "_run");
    sim::MetricsReport m;
    std::string backend = "built-in point-queue simulator";
    if (auto exe = env_var(adapter_env); exe && !exe->empty())
    {
        m = sim::run_external(scenario, {*exe, {}, dir}).metrics;
        backend = "adapter " + *exe;
    }
    else
    {
        tsc::FixedTimeController controller(30);
        m = sim::run(scenario, controller).second;
    }
    const auto metrics = dir / "metrics.json";
    sim::write_metrics_json(m, metrics);
    return {label + " run (" + backend + "): " + metrics_text(m) + ". Metrics saved to " + rel(ctx, metrics),
            {{Attachment::Kind::file, metrics.string(), "metrics.json"}}};
}

ToolResult simulate_libsignal(const json& p, ToolContext& ctx)
{
    const auto kind = tsc::policy_kind_from_string(p.at("algorithm").get<std::string>());
    if (kind == tsc::PolicyKind::chatzero)
        fail(Errc::InvalidSpec, "simulateOnLibsignal runs fixedtime, sotl or qlearning", {"algorithm"});
    const int episodes = opt_int(p, "episodes", kind == tsc::PolicyKind::qlearning ? 10 : 1);
    require(episodes >= 1 && episodes <= 500, "episodes must lie in [1, 500]");
    const auto scenario = build_scenario(inputs_from(p, ctx));
    const auto dir = out_dir(ctx, "libsignal_" + std::string(tsc::to_string(kind)));
    const auto out = tsc::run_experiment(scenario, {kind, json::object()}, episodes, dir);
    ToolResult r {std::string(tsc::to_string(kind)) + " over " + std::to_string(episodes) +
                      " episode(s): " + metrics_text(out.final_metrics) + ". Logs saved to " + rel(ctx, dir),
                  {{Attachment::Kind::file, out.metrics_json.string(), "metrics.json"},
                   {Attachment::Kind::table, out.curve_csv.string(), "training_curve.csv"}}};
    if (!out.checkpoint.empty())
        r.attachments.push_back({Attachment::Kind::file, out.checkpoint.string(), "checkpoint.json"});
    return r;
}

ToolResult log_analyzer(const json& p, ToolContext& ctx)
{
    const auto a = ctx.resolve(p.at("log").get<std::string>());
    const auto b = opt_path(p, "compare", ctx);
    return {tsc::analyze_logs(a, b).text, {}};
}

ToolResult result_explainer(const json& p, ToolContext& ctx)
{
    const auto report = tsc::load_log(ctx.resolve(p.at("metrics").get<std::string>()));
    return {tsc::explain_result(report, ctx.llm.get()), {}};
}

ToolResult visualize_training_curves(const json& p, ToolContext& ctx)
{
    auto path = ctx.resolve(p.at("curve").get<std::string>());
    if (fs::is_directory(path))
        path /= "training_curve.csv";
    const auto svg = tsc::visualize_training(tsc::read_training_curve(path), out_dir(ctx, "training_plots"));
    return {"Training curves saved to " + rel(ctx, svg), {{Attachment::Kind::image, svg.string(), "training curves"}}};
}

ToolResult demand_optimizer(const json& p, ToolContext& ctx)
{
    ScenarioInputs in = inputs_from(p, ctx);
    require(in.network && in.demand, "demandOptimizer needs the network and a seed demand file");
    const auto scenario = build_scenario(in);
    const auto obs = demand::read_counts_csv(ctx.resolve(p.at("counts").get<std::string>()));
    demand::GaParams ga;
    ga.population = opt_int(p, "population", 20);
    ga.generations = opt_int(p, "generations", 20);
    ga.seed = ctx.seed;
    const auto res = demand::optimize_demand(scenario.od, obs, scenario, ga);
    const auto dir = out_dir(ctx, "calibration");
    demand::write_demand_csv(res.best, dir / "demand.csv");
    const auto shape = zone_shape_for(*in.demand, res.best.zones());
    write_file((dir / "zones.json").string(), json{{"rows", shape.rows}, {"cols", shape.cols}}.dump() + "\n");
    demand::write_ga_history(res.history, dir / "ga_history.csv");
    demand::write_residuals(res.residuals, dir / "residuals.csv");
    return {"Calibrated demand (RMSE " + format_general(res.history.front().best_rmse) + " -> " +
                format_general(res.best_rmse) + " over " + std::to_string(ga.generations) + " generations) saved to " +
                rel(ctx, dir / "demand.csv"),
            {{Attachment::Kind::table, (dir / "demand.csv").string(), "demand.csv"},
             {Attachment::Kind::table, (dir / "ga_history.csv").string(), "ga_history.csv"},
             {Attachment::Kind::table, (dir / "residuals.csv").string(), "residuals.csv"}}};
}

ParamSpec param(std::string name, ParamType type, bool required, std::string doc, std::vector<std::string> values = {})
{
    return {std::move(name), type, required, std::move(doc), std::move(values)};
}

} // namespace

std::vector<ToolDescriptor> descriptors()
{
    std::vector<ToolDescriptor> d;
    auto add = [&](std::string name, std::string description, std::string format, std::string example,
                   std::string reflection, std::string emphasis, std::vector<ParamSpec> params) {
        d.push_back({std::move(name), std::move(description), std::move(format), std::move(example),
                     std::move(reflection), std::move(emphasis), std::move(params)});
    };
    add("queryAreaRange",
        "You are designed to respond with longitudes and latitudes information of a location.",
        "The format of your output is a 4 value array [min_long, min_lat, max_long, max_lat].",
        "Human ask \"Where is Arizona State University, Tempe Campus\", you need to output "
        "[-111.9431, 33.4154, -111.9239, 33.4280].",
        "You should respond directly with what you know and then stop.",
        "You have a specific tool to directly query the location.",
        {param("place", ParamType::text, true, "name of the place to locate")});
    add("showOnMap",
        "Display the location of interest on the map, such as the ASU campus area.",
        "Give either place as a name, bbox as [min_long, min_lat, max_long, max_lat], or network as a file path.",
        "Human ask \"Show me Arizona State University on the map\": call showOnMap with place "
        "\"Arizona State University, Tempe Campus\".",
        "If the place is unknown, ask for a more specific name instead of guessing coordinates.",
        "Use this tool whenever the user wants to see a place or a network, not queryAreaRange.",
        {param("place", ParamType::text, false, "place name to show"),
         param("bbox", ParamType::bbox, false, "area to show"),
         param("network", ParamType::path, false, "OSM file or GMNS directory to draw")});
    add("autoDownloadOpenStreetMapFile",
        "Automatically download map data from OpenStreetMap for a specified area.",
        "bbox must be [min_long, min_lat, max_long, max_lat] in degrees; obtain it with queryAreaRange first.",
        "Human ask \"Download the OSM file of Arizona State University\": first call queryAreaRange, then call "
        "autoDownloadOpenStreetMapFile with bbox [-111.9431, 33.4154, -111.9239, 33.428].",
        "Check that the bbox covers the requested place and is no larger than needed.",
        "Only this tool writes .osm files; do not answer with coordinates alone.",
        {param("bbox", ParamType::bbox, true, "area to download")});
    add("simulateOnLibsignal",
        "Execute signal control simulations on the built-in Libsignal-style environment with a chosen algorithm.",
        "algorithm must be one of fixedtime, sotl, qlearning; episodes is a positive integer.",
        "Human ask \"Run SOTL on the intersection\": call simulateOnLibsignal with algorithm \"sotl\".",
        "If the user names an unsupported algorithm, tell them the supported ones instead of picking one.",
        "Use this tool for traffic signal control experiments, not simulateOnSUMO.",
        {param("algorithm", ParamType::enumeration, true, "signal control algorithm", {"fixedtime", "sotl", "qlearning"}),
         param("episodes", ParamType::integer, false, "training episodes"),
         param("network", ParamType::path, false, "OSM file or GMNS directory"),
         param("demand", ParamType::path, false, "demand.csv for the network")});
    add("networkFilter",
        "Filter the road network based on required categories, return the file path of a filtered road network "
        "that emphasizes lanes of interest.",
        "network is an .osm file or GMNS directory; mode is one of drive, bike, walk, rail.",
        "Human ask \"Keep only the bikeable roads of map.osm\": call networkFilter with network \"map.osm\" and mode \"bike\".",
        "If no link carries the mode, report that instead of returning the full network.",
        "The result is a GMNS directory path.",
        {param("network", ParamType::path, true, "OSM file or GMNS directory"),
         param("mode", ParamType::enumeration, true, "travel mode to keep", {"drive", "bike", "walk", "rail"})});
    add("generateDemand",
        "Generate demand based on OpenStreetMap data with a gravity model over a zone grid.",
        "network is an .osm file or GMNS directory; total_vph is trips per hour; rows and cols size the zone grid.",
        "Human ask \"Generate demand for map.osm\": call generateDemand with network \"map.osm\".",
        "Make sure the network file exists before generating demand.",
        "This tool writes demand.csv; use visualizeDemand to draw it.",
        {param("network", ParamType::path, true, "OSM file or GMNS directory"),
         param("total_vph", ParamType::real, false, "total trips per hour"),
         param("beta", ParamType::real, false, "distance decay exponent"),
         param("rows", ParamType::integer, false, "zone grid rows"),
         param("cols", ParamType::integer, false, "zone grid columns"),
         param("start_hour", ParamType::integer, false, "first hour of day"),
         param("hours", ParamType::integer, false, "number of hours")});
    add("simulateOnDLSim",
        "Simulate on the DLSim multi-resolution traffic simulator.",
        "network is an .osm file or GMNS directory; demand is a demand.csv generated for that network.",
        "Human ask \"Simulate map.osm with DLSim\": call simulateOnDLSim with network \"map.osm\".",
        "If the simulation fails, check that the demand file matches the network.",
        "Use this tool when the user mentions DLSim.",
        {param("network", ParamType::path, false, "OSM file or GMNS directory"),
         param("demand", ParamType::path, false, "demand.csv for the network")});
    add("simulateOnSUMO",
        "Execute the simulation given arbitrary .osm data.",
        "network is the .osm file path; demand is optional.",
        "Human ask \"Run a SUMO simulation of map.osm\": call simulateOnSUMO with network \"map.osm\".",
        "If the file is missing, download it with autoDownloadOpenStreetMapFile first.",
        "Use this tool when the user mentions SUMO or a plain simulation of an .osm file.",
        {param("network", ParamType::path, true, "OSM file or GMNS directory"),
         param("demand", ParamType::path, false, "demand.csv for the network")});
    add("visualizeDemand",
        "Automatically generate and display visualizations of the demand file.",
        "demand is the path of a demand.csv file.",
        "Human ask \"Show the demand in demand/demand.csv\": call visualizeDemand with demand \"demand/demand.csv\".",
        "If no demand file exists yet, generate it with generateDemand first.",
        "This tool draws heatmaps; it does not create demand.",
        {param("demand", ParamType::path, true, "demand.csv path")});
    add("logAnalyzer",
        "Analyze log or config files and provide comparisons.",
        "log is a metrics.json, training_curve.csv or run directory; compare is an optional second one.",
        "Human ask \"Compare libsignal_sotl and libsignal_fixedtime\": call logAnalyzer with log \"libsignal_fixedtime\" "
        "and compare \"libsignal_sotl\".",
        "Name the files you compared in the answer.",
        "Use this tool to read results, not to run new simulations.",
        {param("log", ParamType::path, true, "first log"), param("compare", ParamType::path, false, "second log")});
    add("resultExplainer",
        "Interpreter results to provide insights.",
        "metrics is a metrics.json file or run directory.",
        "Human ask \"Explain the results in libsignal_sotl\": call resultExplainer with metrics \"libsignal_sotl\".",
        "Explain only the metrics present in the file.",
        "Use this tool to explain finished runs.",
        {param("metrics", ParamType::path, true, "metrics.json or run directory")});
    add("demandOptimizer",
        "Approximate the origin-destination demand to fit realistic observation.",
        "network and demand are paths; counts is a counts CSV (link_id,hour,count).",
        "Human ask \"Calibrate demand/demand.csv to counts.csv on map.osm\": call demandOptimizer with network "
        "\"map.osm\", demand \"demand/demand.csv\" and counts \"counts.csv\".",
        "Report the RMSE before and after calibration.",
        "This tool runs a genetic algorithm and may take a while.",
        {param("network", ParamType::path, true, "OSM file or GMNS directory"),
         param("demand", ParamType::path, true, "seed demand.csv"),
         param("counts", ParamType::path, true, "observed link counts"),
         param("generations", ParamType::integer, false, "GA generations"),
         param("population", ParamType::integer, false, "GA population")});
    add("visualizeTrainingCurves",
        "Visualize the training process of a signal control run as reward and travel time curves.",
        "curve is a training_curve.csv file or a run directory.",
        "Human ask \"Plot the training of libsignal_qlearning\": call visualizeTrainingCurves with curve "
        "\"libsignal_qlearning\".",
        "If the run has no training_curve.csv, run simulateOnLibsignal first.",
        "This tool draws existing curves; it does not train.",
        {param("curve", ParamType::path, true, "training_curve.csv or run directory")});
    return d;
}

std::shared_ptr<agent::ToolRegistry> make_registry()
{
    const std::map<std::string, agent::ToolHandler> handlers {
        {"queryAreaRange", query_area_range},
        {"showOnMap", show_on_map},
        {"autoDownloadOpenStreetMapFile", download_osm},
        {"simulateOnLibsignal", simulate_libsignal},
        {"networkFilter", network_filter},
        {"generateDemand", generate_demand},
        {"simulateOnDLSim", [](const json& p, ToolContext& c) { return simulate_with(p, c, "dlsim", "OPENTI_DLSIM_ADAPTER"); }},
        {"simulateOnSUMO", [](const json& p, ToolContext& c) { return simulate_with(p, c, "sumo", "OPENTI_SUMO_ADAPTER"); }},
        {"visualizeDemand", visualize_demand},
        {"logAnalyzer", log_analyzer},
        {"resultExplainer", result_explainer},
        {"demandOptimizer", demand_optimizer},
        {"visualizeTrainingCurves", visualize_training_curves},
    };
    auto reg = std::make_shared<agent::ToolRegistry>();
    for (auto& d: descriptors())
    {
        const auto h = handlers.at(d.name);
        reg->register_tool(std::move(d), h);
    }
    return reg;
}

} // namespace openti::toolset
