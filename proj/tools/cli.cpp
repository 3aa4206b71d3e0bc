// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <openti/core/env.hpp>
#include <openti/core/error.hpp>
#include <openti/core/text.hpp>
#include <openti/eval/eval.hpp>
#include <openti/llm/action.hpp>
#include <openti/llm/gateway.hpp>
#include <openti/llm/mock_backend.hpp>
#include <openti/service/service.hpp>
#include <openti/sim/metrics.hpp>
#include <openti/sim/simulator.hpp>
#include <openti/toolset/toolset.hpp>
#include <openti/tsc/policy.hpp>
#include <openti/tsc/training.hpp>

#include <CLI11.hpp>

#include <csignal>
#include <filesystem>

namespace openti::cli
{

namespace fs = std::filesystem;
using nlohmann::json;

namespace
{

struct UsageError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct Common
{
    bool offline = false;
    std::uint64_t seed = 0;
    std::string data_dir;

    bool is_offline() const { return offline || offline_from_env(); }
    fs::path data() const { return data_dir.empty() ? fs::path(openti::data_dir()) : fs::path(data_dir); }
};

void add_common(CLI::App* sub, Common& c)
{
    sub->add_flag("--offline", c.offline, "use bundled fixtures, never the network");
    sub->add_option("--seed", c.seed, "random seed");
    sub->add_option("--data-dir", c.data_dir, "fixture directory");
}

llm::BackendPtr make_llm(const std::string& kind, const std::string& script, const Common& c)
{
    llm::GatewaySettings s = llm::settings_from_env(script);
    if (kind == "mock" || c.is_offline())
        s.kind = llm::BackendKind::mock;
    else
    {
        s.kind = llm::BackendKind::remote;
        if (s.endpoint.empty())
            throw UsageError("--llm remote needs OPENTI_LLM_ENDPOINT");
    }
    return llm::make_backend(s);
}

agent::AgentConfig agent_config(const Common& c, int max_query)
{
    agent::AgentConfig a;
    a.max_query = max_query;
    a.data_dir = c.data();
    a.offline = c.is_offline();
    a.seed = c.seed;
    return a;
}

void print_result(const agent::ToolResult& r, std::ostream& out)
{
    out << r.text << '\n';
    for (const auto& a: r.attachments)
        out << "[" << agent::to_string(a.kind) << "] " << (a.label.empty() ? "" : a.label + ": ") << a.target << '\n';
}

std::vector<agent::PromptField> parse_order(const std::string& text)
{
    static const std::map<std::string, agent::PromptField> abbrev {
        {"e", agent::PromptField::emphasis},  {"r", agent::PromptField::reflection},
        {"fr", agent::PromptField::format_restriction}, {"ex", agent::PromptField::example},
        {"d", agent::PromptField::description}};
    std::vector<agent::PromptField> order;
    for (const auto& tok: split(text, ','))
    {
        const auto key = to_lower(trim(tok));
        if (const auto it = abbrev.find(key); it != abbrev.end())
            order.push_back(it->second);
        else if (const auto f = agent::prompt_field_from_string(key))
            order.push_back(*f);
        else
            throw UsageError("unknown prompt component '" + trim(tok) + "'");
    }
    return order;
}

int chat(const Common& c, const std::string& llm_kind, const std::string& script, const fs::path& workspace,
         int max_query, bool trace, std::ostream& out, std::istream& in)
{
    auto agent = agent::Agent(toolset::make_registry(), make_llm(llm_kind, script, c), agent_config(c, max_query));
    agent::Session session("chat-" + std::to_string(c.seed), workspace);
    std::string line;
    out << "openti> " << std::flush;
    while (std::getline(in, line))
    {
        line = trim(line);
        if (line == "exit" || line == "quit")
            break;
        if (!line.empty())
        {
            const auto before = session.trace_size();
            const auto o = agent.dispatch(session, line);
            if (trace)
                for (const auto& ev: session.trace_since(before))
                    out << "  " << agent::to_string(ev.kind) << (ev.tool_name ? " " + *ev.tool_name : "") << ": "
                        << ev.text << '\n';
            out << o.reply << '\n';
            for (const auto& a: o.attachments)
                out << "[" << agent::to_string(a.kind) << "] " << a.label << ": " << a.target << '\n';
            if (o.status != agent::DispatchStatus::ok)
                out << "(outcome: " << agent::to_string(o.status) << ")\n";
        }
        out << "openti> " << std::flush;
    }
    out << '\n';
    return 0;
}

int tool_run(const Common& c, const std::string& name, const std::string& params_text, const fs::path& out_dir,
             std::ostream& out)
{
    const auto registry = toolset::make_registry();
    const auto* tool = registry->find(name);
    if (!tool)
        throw UsageError("unknown tool '" + name + "'");
    json params;
    try
    {
        params = json::parse(params_text);
    }
    catch (const json::exception& e)
    {
        throw UsageError(std::string("--params is not valid JSON: ") + e.what());
    }
    if (!params.is_object())
        throw UsageError("--params must be a JSON object");
    llm::AgentAction action;
    action.kind = llm::ActionKind::tool_call;
    action.tool_name = name;
    action.arguments = params;
    json validated;
    try
    {
        validated = agent::extract_params(tool->descriptor, action);
    }
    catch (const Error& e)
    {
        throw UsageError(std::string(e.what()) + (e.details().empty() ? "" : " (" + join(e.details(), ", ") + ")"));
    }
    fs::create_directories(out_dir);
    agent::ToolContext ctx {fs::absolute(out_dir), c.data(), c.is_offline(), c.seed, nullptr};
    print_result(tool->handler(validated, ctx), out);
    return 0;
}

int eval_cmd(const Common& c, const std::string& battery_path, const std::string& llm_kind, const std::string& script,
             const std::string& replay, int trials, const fs::path& out_dir, int max_query, std::ostream& out)
{
    const auto registry = toolset::make_registry();
    const auto battery = eval::load_battery(battery_path, registry.get());
    eval::BackendFactory factory;
    if (llm_kind == "replay")
    {
        if (replay.empty())
            throw UsageError("--llm replay needs --replay <file>");
        auto lib = std::make_shared<eval::ReplayLibrary>(eval::ReplayLibrary::from_file(replay));
        factory = [lib](const eval::TaskCase& t, int k) { return lib->backend(t.task_id, k); };
    }
    else
    {
        const auto backend =
            make_llm(llm_kind, script.empty() ? (c.data() / "mock" / "battery_correct.json").string() : script, c);
        factory = [backend](const eval::TaskCase&, int) { return backend; };
    }
    eval::BatteryConfig cfg;
    cfg.workspace = out_dir / "eval_workspace";
    cfg.agent = agent_config(c, max_query);
    const auto records = eval::run_battery(battery, trials, registry, factory, cfg);
    const auto report = eval::error_rates(records);
    fs::create_directories(out_dir);
    eval::write_eval_report(report, records, out_dir / "eval_report.json");
    out << "T=" << report.T << " n_c=" << report.n_c << " error_rate=" << format_fixed(report.aggregate, 4)
        << " no_api_call=" << format_fixed(report.rho_no, 4) << " mismatch=" << format_fixed(report.rho_miss, 4)
        << " error_raise=" << format_fixed(report.rho_error, 4) << '\n';
    for (const auto& t: report.tasks)
        out << "task " << t.task_id << ": " << t.c_no << " " << t.c_miss << " " << t.c_error << '\n';
    out << (out_dir / "eval_report.json").string() << '\n';
    return 0;
}

int ablate_cmd(const Common& c, const std::string& battery_path, const std::string& llm_kind, const std::string& script,
               const std::string& replay, int trials, const std::string& order_text, const fs::path& out_dir,
               int max_query, std::ostream& out)
{
    const auto registry = toolset::make_registry();
    const auto battery = eval::load_battery(battery_path, registry.get());
    const auto order = order_text.empty() ? eval::default_removal_order() : parse_order(order_text);
    eval::AblationBackendFactory factory;
    if (llm_kind == "replay")
    {
        if (replay.empty())
            throw UsageError("--llm replay needs --replay <file>");
        auto lib = std::make_shared<eval::ReplayLibrary>(eval::ReplayLibrary::from_file(replay));
        factory = [lib](int step, const eval::TaskCase& t, int k) {
            return lib->backend(std::to_string(step) + "/" + t.task_id, k);
        };
    }
    else
    {
        if (script.empty() && llm_kind == "mock")
            throw UsageError("--llm mock needs --script <file>");
        const auto backend = make_llm(llm_kind, script, c);
        factory = [backend](int, const eval::TaskCase&, int) { return backend; };
    }
    eval::BatteryConfig cfg;
    cfg.workspace = out_dir / "ablation_workspace";
    cfg.agent = agent_config(c, max_query);
    const auto table = eval::ablate(battery, trials, order, registry, factory, cfg);
    const auto files = eval::write_ablation(table, out_dir);
    out << table.to_csv() << files.csv.string() << '\n' << files.svg.string() << '\n';
    return 0;
}

int serve_cmd(service::ServiceConfig cfg, const Common& c, std::ostream& out)
{
    cfg.offline = c.is_offline();
    cfg.seed = c.seed;
    cfg.data_dir = c.data();
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);
    service::Service svc(cfg, toolset::make_registry(), service::backend_factory(cfg));
    svc.start();
    out << "listening on http://" << cfg.host << ":" << cfg.port << " (workspace " << fs::absolute(cfg.workspace).string()
        << ")" << std::endl;
    int sig = 0;
    sigwait(&set, &sig);
    out << "shutting down" << std::endl;
    svc.stop();
    pthread_sigmask(SIG_UNBLOCK, &set, nullptr);
    return 0;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err, std::istream& in)
{
    CLI::App app {"Traffic analysis agent: tools, simulation, signal control, calibration and evaluation", "openti"};
    app.require_subcommand(1);
    Common common;
    std::function<int()> action;

    // chat
    std::string llm_kind = "mock", script, replay, battery, order, network, demand, counts;
    fs::path workspace = "openti_workspace", out_dir = ".";
    int max_query = 3, trials = 20, episodes = 30, green = 30, generations = 30, population = 20;
    bool show_trace = false;
    auto* chat_cmd = app.add_subcommand("chat", "talk to the agent on stdin");
    add_common(chat_cmd, common);
    chat_cmd->add_option("--llm", llm_kind)->check(CLI::IsMember({"mock", "remote"}));
    chat_cmd->add_option("--script", script, "mock script (default: bundled chat script)");
    chat_cmd->add_option("--workspace", workspace);
    chat_cmd->add_option("--max-query", max_query)->check(CLI::Range(1, 20));
    chat_cmd->add_flag("--trace", show_trace, "print thoughts, actions and observations");
    chat_cmd->callback([&] {
        action = [&] {
            const auto s = script.empty() ? (common.data() / "mock" / "chat.json").string() : script;
            return chat(common, llm_kind, s, workspace, max_query, show_trace, out, in);
        };
    });

    // tool
    auto* tool_cmd = app.add_subcommand("tool", "run or list tools directly");
    tool_cmd->require_subcommand(1);
    std::string tool_name, params = "{}";
    auto* tool_run_cmd = tool_cmd->add_subcommand("run", "run one tool with JSON parameters");
    add_common(tool_run_cmd, common);
    tool_run_cmd->add_option("name", tool_name)->required();
    tool_run_cmd->add_option("--params", params, "JSON object");
    tool_run_cmd->add_option("--out", out_dir, "artifact directory");
    tool_run_cmd->callback([&] { action = [&] { return tool_run(common, tool_name, params, out_dir, out); }; });
    auto* tool_list_cmd = tool_cmd->add_subcommand("list", "list the tool catalog");
    add_common(tool_list_cmd, common);
    tool_list_cmd->callback([&] {
        action = [&] {
            for (const auto& d: toolset::descriptors())
                out << d.name << (toolset::is_auxiliary(d.name) ? " (auxiliary)" : "") << ": " << d.description << '\n';
            return 0;
        };
    });

    // sim
    std::string controller = "fixedtime";
    double total_vph = 600.0;
    std::optional<int> horizon;
    auto* sim_cmd = app.add_subcommand("sim", "simulate a network with a signal controller");
    add_common(sim_cmd, common);
    sim_cmd->add_option("--network", network, "OSM file or GMNS directory (default: asymmetric single intersection)");
    sim_cmd->add_option("--demand", demand, "demand.csv");
    sim_cmd->add_option("--total-vph", total_vph)->check(CLI::PositiveNumber);
    sim_cmd->add_option("--controller", controller)->check(CLI::IsMember({"fixedtime", "sotl"}));
    sim_cmd->add_option("--green", green, "fixed-time green seconds")->check(CLI::Range(1, 600));
    sim_cmd->add_option("--horizon", horizon, "simulated seconds")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--out", out_dir);
    sim_cmd->callback([&] {
        action = [&] {
            toolset::ScenarioInputs si;
            if (!network.empty())
                si.network = network;
            if (!demand.empty())
                si.demand = demand;
            si.total_vph = total_vph;
            si.seed = common.seed;
            const auto scenario = toolset::build_scenario(si);
            tsc::PolicySpec spec {tsc::policy_kind_from_string(controller), json::object()};
            if (spec.kind == tsc::PolicyKind::fixedtime)
                spec.params["green_s"] = green;
            auto ctrl = tsc::make_policy(spec);
            const auto [res, metrics] = sim::run(scenario, *ctrl, horizon);
            fs::create_directories(out_dir);
            sim::write_metrics_json(metrics, out_dir / "metrics.json");
            out << metrics.to_json().dump(1) << '\n';
            return 0;
        };
    });

    // train
    std::string algorithm = "qlearning";
    auto* train_cmd = app.add_subcommand("train", "run a signal control experiment over episodes");
    add_common(train_cmd, common);
    train_cmd->add_option("--algorithm", algorithm)->check(CLI::IsMember({"fixedtime", "sotl", "qlearning"}));
    train_cmd->add_option("--episodes", episodes)->check(CLI::Range(1, 500));
    train_cmd->add_option("--network", network);
    train_cmd->add_option("--demand", demand);
    train_cmd->add_option("--out", out_dir);
    train_cmd->callback([&] {
        action = [&] {
            toolset::ScenarioInputs si;
            if (!network.empty())
                si.network = network;
            if (!demand.empty())
                si.demand = demand;
            si.seed = common.seed;
            const auto scenario = toolset::build_scenario(si);
            const auto r = tsc::run_experiment(scenario, {tsc::policy_kind_from_string(algorithm), json::object()},
                                               episodes, out_dir);
            const auto& first = r.curve.records.front();
            const auto& last = r.curve.records.back();
            out << algorithm << ": episode 0 reward " << format_general(first.total_reward) << ", episode "
                << last.episode << " reward " << format_general(last.total_reward) << ", ATT "
                << format_fixed(last.att_s, 2) << " s\n"
                << r.metrics_json.string() << '\n'
                << r.curve_csv.string() << '\n';
            if (!r.checkpoint.empty())
                out << r.checkpoint.string() << '\n';
            return 0;
        };
    });

    // calibrate
    auto* calib_cmd = app.add_subcommand("calibrate", "fit OD demand to observed link counts");
    add_common(calib_cmd, common);
    calib_cmd->add_option("--network", network)->required();
    calib_cmd->add_option("--demand", demand)->required();
    calib_cmd->add_option("--counts", counts)->required();
    calib_cmd->add_option("--generations", generations)->check(CLI::Range(1, 10000));
    calib_cmd->add_option("--population", population)->check(CLI::Range(4, 10000));
    calib_cmd->add_option("--out", out_dir);
    calib_cmd->callback([&] {
        action = [&] {
            const json p {{"network", network}, {"demand", demand},        {"counts", counts},
                          {"generations", generations}, {"population", population}};
            return tool_run(common, "demandOptimizer", p.dump(), out_dir, out);
        };
    });

    // eval
    auto* eval_sub = app.add_subcommand("eval", "run a task battery and report error rates");
    add_common(eval_sub, common);
    eval_sub->add_option("--battery", battery, "battery JSON (default: bundled six-task battery)");
    eval_sub->add_option("--llm", llm_kind)->check(CLI::IsMember({"mock", "replay", "remote"}));
    eval_sub->add_option("--script", script, "mock script");
    eval_sub->add_option("--replay", replay, "replay transcripts");
    eval_sub->add_option("--trials", trials)->check(CLI::Range(1, 1000));
    eval_sub->add_option("--max-query", max_query)->check(CLI::Range(1, 20));
    eval_sub->add_option("--out", out_dir);
    eval_sub->callback([&] {
        action = [&] {
            const auto b = battery.empty() ? (common.data() / "battery" / "comparison.json").string() : battery;
            return eval_cmd(common, b, llm_kind, script, replay, trials, out_dir, max_query, out);
        };
    });

    // ablate
    auto* ablate_sub = app.add_subcommand("ablate", "cumulative prompt-component ablation");
    add_common(ablate_sub, common);
    ablate_sub->add_option("--battery", battery, "battery JSON (default: bundled four-tool battery)");
    ablate_sub->add_option("--llm", llm_kind)->check(CLI::IsMember({"mock", "replay", "remote"}));
    ablate_sub->add_option("--script", script, "mock script");
    ablate_sub->add_option("--replay", replay, "replay transcripts keyed <step>/<task>");
    ablate_sub->add_option("--trials", trials)->check(CLI::Range(1, 1000));
    ablate_sub->add_option("--order", order, "removal order, e.g. E,R,FR,Ex,D");
    ablate_sub->add_option("--max-query", max_query)->check(CLI::Range(1, 20));
    ablate_sub->add_option("--out", out_dir);
    ablate_sub->callback([&] {
        action = [&] {
            const auto b = battery.empty() ? (common.data() / "battery" / "ablation.json").string() : battery;
            return ablate_cmd(common, b, llm_kind, script, replay, trials, order, out_dir, max_query, out);
        };
    });

    // serve
    service::ServiceConfig scfg;
    scfg.workspace = "openti_workspace";
    auto* serve_sub = app.add_subcommand("serve", "HTTP service for the chat interface");
    add_common(serve_sub, common);
    serve_sub->add_option("--host", scfg.host);
    serve_sub->add_option("--port", scfg.port)->check(CLI::Range(1, 65535));
    serve_sub->add_option("--workspace", scfg.workspace);
    serve_sub->add_option("--llm", scfg.llm)->check(CLI::IsMember({"mock", "remote"}));
    serve_sub->add_option("--script", scfg.mock_script);
    serve_sub->add_option("--max-query", scfg.max_query)->check(CLI::Range(1, 20));
    serve_sub->add_option("--cors", scfg.cors_allow, "allowed origins");
    serve_sub->callback([&] { action = [&] { return serve_cmd(scfg, common, out); }; });

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp&)
    {
        out << app.help();
        return 0;
    }
    catch (const CLI::CallForAllHelp&)
    {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    }
    catch (const CLI::ParseError& e)
    {
        err << "openti: " << e.what() << '\n';
        return 2;
    }

    try
    {
        return action ? action() : 2;
    }
    catch (const UsageError& e)
    {
        err << "openti: " << e.what() << '\n';
        return 2;
    }
    catch (const Error& e)
    {
        err << "openti: " << e.what() << '\n';
        return 1;
    }
    catch (const std::exception& e)
    {
        err << "openti: " << e.what() << '\n';
        return 1;
    }
}

} // namespace openti::cli
