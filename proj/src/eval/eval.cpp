// SPDX-License-Identifier: Apache-2.0
#include <openti/core/error.hpp>
#include <openti/core/text.hpp>
#include <openti/eval/eval.hpp>
#include <openti/llm/replay_backend.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace openti::eval
{

using nlohmann::json;
namespace fs = std::filesystem;

json TaskCase::to_json() const
{
    json j {{"task_id", task_id}, {"utterance", utterance}, {"expected_tool", expected_tool}};
    if (expected_params)
        j["expected_params"] = *expected_params;
    return j;
}

TaskCase TaskCase::from_json(const json& j)
{
    if (!j.is_object())
        fail(Errc::SchemaError, "task case must be an object", {""});
    TaskCase t;
    for (const char* key: {"utterance", "expected_tool"})
        if (!j.contains(key) || !j.at(key).is_string() || j.at(key).get<std::string>().empty())
            fail(Errc::SchemaError, std::string("task case field '") + key + "' must be a non-empty string", {key});
    if (!j.contains("task_id"))
        fail(Errc::SchemaError, "task case needs a task_id", {"task_id"});
    t.task_id = j.at("task_id").is_string() ? j.at("task_id").get<std::string>() : j.at("task_id").dump();
    t.utterance = j.at("utterance").get<std::string>();
    t.expected_tool = j.at("expected_tool").get<std::string>();
    if (j.contains("expected_params") && !j.at("expected_params").is_null())
    {
        if (!j.at("expected_params").is_object())
            fail(Errc::SchemaError, "expected_params must be an object", {"expected_params"});
        t.expected_params = j.at("expected_params");
    }
    return t;
}

std::vector<TaskCase> load_battery(const fs::path& path, const agent::ToolRegistry* registry)
{
    const auto doc = json::parse(read_file(path.string()), nullptr, false);
    if (doc.is_discarded() || !doc.is_array())
        fail(Errc::SchemaError, path.string() + ": battery must be a JSON list of task cases", {""});
    std::vector<TaskCase> out;
    for (const auto& j: doc)
    {
        out.push_back(TaskCase::from_json(j));
        if (registry)
            require(registry->find(out.back().expected_tool) != nullptr,
                    "battery tool '" + out.back().expected_tool + "' is not registered");
    }
    return out;
}

void save_battery(const std::vector<TaskCase>& battery, const fs::path& path)
{
    json doc = json::array();
    for (const auto& t: battery)
        doc.push_back(t.to_json());
    write_file(path.string(), doc.dump(2) + "\n");
}

std::vector<TaskCase> comparison_battery()
{
    return {
        {"1", "Run a SUMO simulation of the map file osm/asu.osm.", "simulateOnSUMO", json{{"network", "osm/asu.osm"}}},
        {"2", "Show Arizona State University, Tempe Campus on the map.", "showOnMap",
         json{{"place", "Arizona State University, Tempe Campus"}}},
        {"3", "Compare the logs in runs/fixedtime and runs/sotl.", "logAnalyzer",
         json{{"log", "runs/fixedtime"}, {"compare", "runs/sotl"}}},
        {"4", "Plot the training curves of runs/qlearning.", "visualizeTrainingCurves", json{{"curve", "runs/qlearning"}}},
        {"5", "Run SOTL signal control on Libsignal.", "simulateOnLibsignal", json{{"algorithm", "sotl"}}},
        {"6", "Explain the results in runs/sotl.", "resultExplainer", json{{"metrics", "runs/sotl"}}},
    };
}

std::vector<TaskCase> ablation_battery()
{
    return {
        {"queryAreaRange", "Where is Arizona State University, Tempe Campus?", "queryAreaRange",
         json{{"place", "Arizona State University, Tempe Campus"}}},
        {"showOnMap", "Show Arizona State University, Tempe Campus on the map.", "showOnMap",
         json{{"place", "Arizona State University, Tempe Campus"}}},
        {"autoDownloadOpenStreetMapFile", "Download the OpenStreetMap file of Arizona State University, Tempe Campus.",
         "autoDownloadOpenStreetMapFile", json{{"bbox", {-111.9431, 33.4154, -111.9239, 33.428}}}},
        {"simulateOnLibsignal", "Run fixed-time signal control on Libsignal.", "simulateOnLibsignal",
         json{{"algorithm", "fixedtime"}}},
    };
}

json EvalRecord::to_json() const
{
    return {{"task_id", task_id}, {"trial", trial}, {"outcome", agent::to_string(outcome)},
            {"matched_tool", matched_tool}, {"transcript", transcript}};
}

EvalRecord EvalRecord::from_json(const json& j)
{
    EvalRecord r;
    r.task_id = j.at("task_id").get<std::string>();
    r.trial = j.at("trial").get<int>();
    r.outcome = agent::dispatch_status_from_string(j.at("outcome").get<std::string>());
    r.matched_tool = j.value("matched_tool", "");
    r.transcript = j.value("transcript", json::object());
    return r;
}

namespace
{

bool same_value(const json& want, const json& got)
{
    if (want.is_number() && got.is_number())
        return std::abs(want.get<double>() - got.get<double>()) <= 1e-9;
    if (want.is_array() && got.is_array())
    {
        if (want.size() != got.size())
            return false;
        for (std::size_t i = 0; i < want.size(); ++i)
            if (!same_value(want[i], got[i]))
                return false;
        return true;
    }
    return want == got;
}

bool params_match(const json& expected, const json& params)
{
    for (const auto& [k, v]: expected.items())
        if (!params.contains(k) || !same_value(v, params.at(k)))
            return false;
    return true;
}

} // namespace

Outcome classify(const json& transcript, const TaskCase& task)
{
    const auto status = agent::dispatch_status_from_string(transcript.at("status").get<std::string>());
    if (status != Outcome::ok || !task.expected_params)
        return status;
    // The last successful call of the expected tool carries the parameters the answer rests on.
    const json* used = nullptr;
    for (const auto& c: transcript.at("calls"))
        if (c.at("tool") == task.expected_tool && c.at("succeeded").get<bool>())
            used = &c.at("params");
    if (!used)
        return Outcome::no_api_call;
    return params_match(*task.expected_params, *used) ? Outcome::ok : Outcome::error_raise;
}

Outcome classify(const agent::DispatchOutcome& outcome, const TaskCase& task)
{
    return classify(outcome.to_json(), task);
}

std::vector<EvalRecord> run_battery(const std::vector<TaskCase>& battery, int trials,
                                    std::shared_ptr<const agent::ToolRegistry> registry, const BackendFactory& backend,
                                    const BatteryConfig& config)
{
    require(trials >= 1, "trials must be at least 1");
    require(!battery.empty(), "battery is empty");
    require(registry != nullptr, "battery needs a tool registry");
    std::vector<EvalRecord> out;
    std::size_t serial = 0;
    for (const auto& task: battery)
    {
        for (int trial = 0; trial < trials; ++trial)
        {
            EvalRecord rec;
            rec.task_id = task.task_id;
            rec.trial = trial;
            std::string id = config.session_prefix + "-" + std::to_string(serial++);
            try
            {
                agent::Agent agent(registry, backend(task, trial), config.agent);
                agent::Session session(id, config.workspace);
                agent::DispatchOptions opts;
                opts.expected_tool = task.expected_tool;
                opts.mask = config.mask;
                const auto outcome = agent.dispatch(session, task.utterance, opts);
                rec.transcript = outcome.to_json();
                rec.outcome = classify(rec.transcript, task);
                rec.matched_tool = outcome.matched_tool.value_or("");
            }
            catch (const std::exception& e)
            {
                rec.outcome = Outcome::error_raise;
                rec.transcript = {{"status", "error_raise"}, {"failure_reason", e.what()}, {"calls", json::array()}};
            }
            out.push_back(std::move(rec));
        }
    }
    return out;
}

EvalReport error_rates(const std::vector<EvalRecord>& records)
{
    require(!records.empty(), "no evaluation records");
    EvalReport r;
    std::map<std::string, std::size_t> index;
    for (const auto& rec: records)
    {
        auto [it, added] = index.emplace(rec.task_id, r.tasks.size());
        if (added)
            r.tasks.push_back({rec.task_id});
        auto& t = r.tasks[it->second];
        ++t.n;
        switch (rec.outcome)
        {
            case Outcome::ok: break;
            case Outcome::no_api_call: ++t.c_no; break;
            case Outcome::mismatch: ++t.c_miss; break;
            case Outcome::error_raise: ++t.c_error; break;
        }
    }
    r.T = static_cast<int>(r.tasks.size());
    r.n_c = r.tasks.front().n;
    for (const auto& t: r.tasks)
        if (t.n != r.n_c)
            fail(Errc::UnevenTrials,
                 "task " + t.task_id + " has " + std::to_string(t.n) + " trials, expected " + std::to_string(r.n_c),
                 {t.task_id});
    // Shared denominator T * n_c keeps aggregate = rho_no + rho_miss + rho_error.
    long no = 0, miss = 0, err = 0;
    for (const auto& t: r.tasks)
    {
        no += t.c_no;
        miss += t.c_miss;
        err += t.c_error;
    }
    const double denom = static_cast<double>(r.T) * r.n_c;
    r.rho_no = no / denom;
    r.rho_miss = miss / denom;
    r.rho_error = err / denom;
    r.aggregate = static_cast<double>(no + miss + err) / denom;
    return r;
}

json EvalReport::to_json() const
{
    json tasks_j = json::array();
    for (const auto& t: tasks)
        tasks_j.push_back({{"task_id", t.task_id},
                           {"n_c", t.n},
                           {"c_no", t.c_no},
                           {"c_miss", t.c_miss},
                           {"c_error", t.c_error},
                           {"n_e", t.errors()},
                           {"rho_no", t.rho_no()},
                           {"rho_miss", t.rho_miss()},
                           {"rho_error", t.rho_error()},
                           {"error_rate", t.rate()}});
    return {{"T", T},         {"n_c", n_c},         {"rho_no", rho_no}, {"rho_miss", rho_miss},
            {"rho_error", rho_error}, {"error_rate", aggregate}, {"tasks", tasks_j}};
}

void write_eval_report(const EvalReport& report, const std::vector<EvalRecord>& records, const fs::path& path)
{
    auto j = report.to_json();
    j["records"] = json::array();
    for (const auto& r: records)
    {
        auto rj = r.to_json();
        rj.erase("transcript");
        j["records"].push_back(std::move(rj));
    }
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    write_file(path.string(), j.dump(2) + "\n");
}

ReplayLibrary ReplayLibrary::from_file(const fs::path& path)
{
    const auto doc = json::parse(read_file(path.string()), nullptr, false);
    if (doc.is_discarded())
        fail(Errc::SchemaError, path.string() + " is not valid JSON", {""});
    return from_json(doc);
}

ReplayLibrary ReplayLibrary::from_json(const json& doc)
{
    if (!doc.is_object() || !doc.contains("trials") || !doc.at("trials").is_object())
        fail(Errc::SchemaError, "replay library needs a 'trials' object", {"trials"});
    ReplayLibrary lib;
    lib._system = doc.value("system", "");
    for (const auto& [key, list]: doc.at("trials").items())
    {
        if (!list.is_array() || list.empty())
            fail(Errc::SchemaError, "replay key '" + key + "' needs a non-empty trial list", {key});
        for (const auto& t: list)
        {
            if (!t.contains("completions") || !t.at("completions").is_array() || t.at("completions").empty())
                fail(Errc::SchemaError, "replay trial under '" + key + "' needs completions", {key});
            lib._trials[key].push_back({agent::dispatch_status_from_string(t.value("label", "ok")),
                                        t.at("completions").get<std::vector<std::string>>()});
        }
    }
    return lib;
}

const ReplayLibrary::Trial& ReplayLibrary::at(const std::string& key, int trial) const
{
    auto it = _trials.find(key);
    if (it == _trials.end())
        fail(Errc::NotFound, "no replayed trials for '" + key + "'", {key});
    require(trial >= 0, "trial index must be non-negative");
    return it->second[static_cast<std::size_t>(trial) % it->second.size()];
}

llm::BackendPtr ReplayLibrary::backend(const std::string& key, int trial) const
{
    return std::make_shared<llm::ReplayBackend>(at(key, trial).completions);
}

Outcome ReplayLibrary::label(const std::string& key, int trial) const
{
    return at(key, trial).label;
}

int ReplayLibrary::trials(const std::string& key) const
{
    auto it = _trials.find(key);
    return it == _trials.end() ? 0 : static_cast<int>(it->second.size());
}

std::vector<agent::PromptField> default_removal_order()
{
    using F = agent::PromptField;
    return {F::emphasis, F::reflection, F::format_restriction, F::example, F::description};
}

std::string AblationTable::to_csv() const
{
    std::ostringstream o;
    o << "mask";
    for (const auto& c: columns)
        o << ',' << c;
    o << '\n';
    for (std::size_t r = 0; r < rows.size(); ++r)
    {
        o << rows[r];
        for (double v: accuracy[r])
            o << ',' << format_fixed(v, 4);
        o << '\n';
    }
    return o.str();
}

double AblationTable::at(const std::string& row, const std::string& column) const
{
    const auto r = std::find(rows.begin(), rows.end(), row);
    const auto c = std::find(columns.begin(), columns.end(), column);
    require(r != rows.end() && c != columns.end(), "no ablation cell " + row + " / " + column);
    return accuracy[static_cast<std::size_t>(r - rows.begin())][static_cast<std::size_t>(c - columns.begin())];
}

AblationTable ablate(const std::vector<TaskCase>& battery, int trials, const std::vector<agent::PromptField>& order,
                     std::shared_ptr<const agent::ToolRegistry> registry, const AblationBackendFactory& backend,
                     const BatteryConfig& config)
{
    const std::set<agent::PromptField> distinct(order.begin(), order.end());
    require(order.size() == agent::kPromptFields.size() && distinct.size() == order.size(),
            "removal order must be a permutation of the five prompt components");
    AblationTable table;
    for (const auto& t: battery)
        table.columns.push_back(t.task_id);
    BatteryConfig cfg = config;
    cfg.mask.clear();
    std::string label;
    for (std::size_t step = 0; step <= order.size(); ++step)
    {
        if (step > 0)
        {
            cfg.mask.insert(order[step - 1]);
            label += (label.empty() ? "-" : " -") + std::string(agent::label(order[step - 1]));
        }
        table.rows.push_back(step == 0 ? "none" : label);
        cfg.session_prefix = config.session_prefix + "-m" + std::to_string(step);
        const int s = static_cast<int>(step);
        const auto records = run_battery(battery, trials, registry,
                                         [&](const TaskCase& t, int trial) { return backend(s, t, trial); }, cfg);
        std::vector<double> row;
        for (const auto& t: battery)
        {
            int ok = 0, n = 0;
            for (const auto& r: records)
                if (r.task_id == t.task_id)
                {
                    ++n;
                    ok += r.outcome == Outcome::ok;
                }
            row.push_back(n ? static_cast<double>(ok) / n : 0.0);
        }
        table.accuracy.push_back(std::move(row));
    }
    return table;
}

std::string render_ablation_svg(const AblationTable& table)
{
    constexpr int cell_w = 150, cell_h = 40, left = 260, top = 60;
    const int w = left + cell_w * static_cast<int>(table.columns.size()) + 20;
    const int h = top + cell_h * static_cast<int>(table.rows.size()) + 40;
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w
      << ' ' << h << "\">\n";
    o << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
    o << "<text x=\"" << left << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">Accuracy by prompt mask</text>\n";
    for (std::size_t c = 0; c < table.columns.size(); ++c)
        o << "<text x=\"" << left + cell_w * static_cast<int>(c) + cell_w / 2 << "\" y=\"" << top - 8
          << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" << xml_escape(table.columns[c])
          << "</text>\n";
    for (std::size_t r = 0; r < table.rows.size(); ++r)
    {
        const int y = top + cell_h * static_cast<int>(r);
        o << "<text x=\"" << left - 8 << "\" y=\"" << y + cell_h / 2 + 4
          << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" << xml_escape(table.rows[r])
          << "</text>\n";
        for (std::size_t c = 0; c < table.columns.size(); ++c)
        {
            const double v = std::clamp(table.accuracy[r][c], 0.0, 1.0);
            // Light (202,230,242) at 0 to dark (0,102,150) at 1.
            const auto mix = [v](int lo, int hi) { return static_cast<int>(std::lround(lo + (hi - lo) * v)); };
            const int x = left + cell_w * static_cast<int>(c);
            o << "<rect class=\"cell\" x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell_w << "\" height=\"" << cell_h
              << "\" fill=\"rgb(" << mix(202, 0) << ',' << mix(230, 102) << ',' << mix(242, 150)
              << ")\" stroke=\"white\"/>\n";
            o << "<text x=\"" << x + cell_w / 2 << "\" y=\"" << y + cell_h / 2 + 4
              << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" fill=\""
              << (v > 0.5 ? "white" : "black") << "\">" << format_fixed(v, 2) << "</text>\n";
        }
    }
    o << "</svg>\n";
    return o.str();
}

AblationArtifacts write_ablation(const AblationTable& table, const fs::path& out_dir)
{
    fs::create_directories(out_dir);
    AblationArtifacts a {out_dir / "ablation.csv", out_dir / "ablation.svg"};
    write_file(a.csv.string(), table.to_csv());
    write_file(a.svg.string(), render_ablation_svg(table));
    return a;
}

} // namespace openti::eval
