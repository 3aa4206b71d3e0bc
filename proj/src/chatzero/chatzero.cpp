// SPDX-License-Identifier: Apache-2.0
#include <openti/chatzero/chatzero.hpp>
#include <openti/core/error.hpp>
#include <openti/core/geodesy.hpp>
#include <openti/core/text.hpp>
#include <openti/sim/simulator.hpp>

#include <filesystem>
#include <fstream>
#include <regex>

namespace openti::chatzero
{

using nlohmann::json;

void PolicyBrief::validate() const
{
    require(!trim(objective).empty(), "policy brief needs an objective");
    require(!trim(action_space_doc).empty(), "policy brief needs an action space description");
}

std::string PolicyBrief::to_text() const
{
    std::string out = "Objective: " + objective + "\n";
    if (!constraints.empty())
    {
        out += "Constraints:\n";
        for (const auto& c: constraints)
            out += "- " + c + "\n";
    }
    out += "Action space:\n" + action_space_doc;
    if (!action_space_doc.empty() && action_space_doc.back() != '\n')
        out += "\n";
    return out;
}

json PolicyBrief::to_json() const
{
    return {{"objective", objective}, {"constraints", constraints}, {"action_space_doc", action_space_doc}};
}

PolicyBrief PolicyBrief::from_json(const json& j)
{
    PolicyBrief b;
    if (!j.is_object())
        fail(Errc::SchemaError, "policy brief must be a JSON object", {""});
    for (const char* key: {"objective", "action_space_doc"})
        if (!j.contains(key) || !j.at(key).is_string())
            fail(Errc::SchemaError, std::string("policy brief field '") + key + "' must be a string", {key});
    b.objective = j.at("objective").get<std::string>();
    b.action_space_doc = j.at("action_space_doc").get<std::string>();
    if (j.contains("constraints"))
    {
        const auto& c = j.at("constraints");
        if (!c.is_array())
            fail(Errc::SchemaError, "policy brief field 'constraints' must be a list", {"constraints"});
        for (const auto& x: c)
        {
            if (!x.is_string())
                fail(Errc::SchemaError, "policy brief constraints must be strings", {"constraints"});
            b.constraints.push_back(x.get<std::string>());
        }
    }
    return b;
}

namespace
{

std::string compass(double bearing)
{
    static const char* names[] = {"north", "east", "south", "west"};
    const int k = static_cast<int>(std::floor(std::fmod(bearing + 45.0, 360.0) / 90.0)) % 4;
    return names[k];
}

} // namespace

std::string action_space_doc(const network::SignalizedIntersection& intersection, const network::RoadNetwork& net)
{
    std::string out;
    const auto centre = net.node(intersection.node_id).pos();
    for (std::size_t p = 0; p < intersection.phases.size(); ++p)
    {
        std::vector<std::string> parts;
        for (auto l: intersection.phases[p].approaches)
        {
            const auto& link = net.link(l);
            parts.push_back("approach " + std::to_string(intersection.approach_index(l)) + " (link " +
                            std::to_string(l) + ", from the " + compass(bearing_deg(centre, net.node(link.from).pos())) +
                            ")");
        }
        out += "Phase " + std::to_string(p) + ": green for " + (parts.empty() ? std::string("no approach") : join(parts, ", ")) +
               "\n";
    }
    return out;
}

std::string action_space_doc(const network::RoadNetwork& net)
{
    require(!net.intersections().empty(), "network has no signalized intersection");
    return action_space_doc(net.intersections().front(), net);
}

namespace
{

std::optional<PolicyBrief> parse_brief(const std::string& content, const std::string& doc)
{
    const auto open = content.find('{');
    const auto close = content.rfind('}');
    if (open == std::string::npos || close == std::string::npos || close < open)
        return std::nullopt;
    const auto j = json::parse(content.substr(open, close - open + 1), nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("objective") || !j.at("objective").is_string())
        return std::nullopt;
    PolicyBrief b;
    b.objective = trim(j.at("objective").get<std::string>());
    if (b.objective.empty())
        return std::nullopt;
    if (j.contains("constraints"))
    {
        if (!j.at("constraints").is_array())
            return std::nullopt;
        for (const auto& c: j.at("constraints"))
        {
            if (!c.is_string())
                return std::nullopt;
            b.constraints.push_back(c.get<std::string>());
        }
    }
    b.action_space_doc = doc;
    return b;
}

const char* kBriefSystem =
    "You turn a traffic engineer's signal control policy into a brief for a control agent. "
    "Reply with one JSON object: {\"objective\": \"<one sentence>\", \"constraints\": [\"<rule>\", ...]}.";

const char* kStepSystem =
    "You are a traffic signal control agent. Each step you receive the policy brief and the current "
    "observation of one intersection and choose the next phase.";

} // namespace

PolicyBrief describe_policy(const std::string& user_text, llm::LlmBackend& llm, const std::string& doc,
                            const std::string& model_id)
{
    require(!trim(user_text).empty(), "policy text must not be empty");
    require(!trim(doc).empty(), "action space description must not be empty");
    llm::ChatRequest req;
    req.model_id = model_id;
    req.messages = {{llm::Role::system, kBriefSystem},
                    {llm::Role::user, "Policy: " + user_text + "\nAction space:\n" + doc}};
    std::string last;
    for (int attempt = 0; attempt < 2; ++attempt)
    {
        last = llm.complete(req).content;
        if (auto b = parse_brief(last, doc))
            return *b;
        req.messages.push_back({llm::Role::assistant, last});
        req.messages.push_back(
            {llm::Role::user, "Policy brief repair: answer with only the JSON object {\"objective\": ..., \"constraints\": [...]}."});
    }
    fail(Errc::ExtractionFailure, "could not extract a policy brief from the model answer: " + last, {last});
}

json observation_json(const sim::TscObservation& obs, const network::SignalizedIntersection& intersection)
{
    json phases = json::array();
    for (const auto& ph: intersection.phases)
    {
        json served = json::array();
        for (auto l: ph.approaches)
            served.push_back(intersection.approach_index(l));
        phases.push_back(std::move(served));
    }
    return {{"intersection", obs.intersection_id},
            {"time_s", obs.sim_time_s},
            {"queues", obs.queue_per_approach},
            {"current_phase", obs.current_phase},
            {"time_in_phase_s", obs.time_in_phase_s},
            {"in_transition", obs.in_transition},
            {"phase_approaches", std::move(phases)}};
}

std::optional<int> parse_phase(const std::string& answer)
{
    static const std::regex re(R"(PHASE:\s*([-+]?\d+))", std::regex::icase);
    std::smatch m;
    if (!std::regex_search(answer, m, re))
        return std::nullopt;
    try
    {
        return std::stoi(m[1].str());
    }
    catch (const std::exception&)
    {
        return std::nullopt;
    }
}

namespace
{

std::string reason_after_phase(const std::string& answer)
{
    static const std::regex re(R"(PHASE:\s*[-+]?\d+)", std::regex::icase);
    // Separators between the phase and the reason, including UTF-8 en and em dashes.
    static const std::regex lead("^(\\s|[-:.,;]|\xE2\x80\x93|\xE2\x80\x94)+");
    std::smatch m;
    const std::string rest = std::regex_search(answer, m, re) ? m.suffix().str() : answer;
    return trim(std::regex_replace(rest, lead, ""));
}

} // namespace

ZeroStepResult zero_step(const sim::TscObservation& obs, const network::SignalizedIntersection& intersection,
                         const PolicyBrief& brief, llm::LlmBackend& llm, const std::string& model_id)
{
    const int n = static_cast<int>(intersection.phases.size());
    llm::ChatRequest req;
    req.model_id = model_id;
    req.messages = {{llm::Role::system, kStepSystem},
                    {llm::Role::user, brief.to_text() + "Observation: " + observation_json(obs, intersection).dump() +
                                          "\nAnswer with `PHASE: <k>` (k from 0 to " + std::to_string(n - 1) +
                                          ") followed by a one-sentence reason."}};
    std::string problem;
    for (int attempt = 0; attempt < 2; ++attempt)
    {
        std::string answer;
        try
        {
            answer = llm.complete(req).content;
        }
        catch (const Error& e)
        {
            problem = std::string(to_string(e.code())) + ": " + e.what();
            break;
        }
        const auto k = parse_phase(answer);
        if (k && *k >= 0 && *k < n)
        {
            auto reason = reason_after_phase(answer);
            if (reason.empty())
                reason = "chose phase " + std::to_string(*k);
            return {{*k}, reason, false};
        }
        problem = k ? "phase " + std::to_string(*k) + " is out of range" : "no `PHASE: <k>` in the answer";
        req.messages.push_back({llm::Role::assistant, answer});
        req.messages.push_back({llm::Role::user, "PHASE format repair: " + problem + ". Answer with `PHASE: <k>` for k from 0 to " +
                                                     std::to_string(n - 1) + " and one sentence of reason."});
    }
    return {{obs.current_phase}, "fallback: kept phase " + std::to_string(obs.current_phase) + " (" + problem + ")", true};
}

int greedy_phase(const sim::TscObservation& obs, const network::SignalizedIntersection& intersection)
{
    int best = 0;
    long best_sum = -1;
    for (std::size_t p = 0; p < intersection.phases.size(); ++p)
    {
        long sum = 0;
        for (auto l: intersection.phases[p].approaches)
        {
            const int a = intersection.approach_index(l);
            if (a >= 0 && a < static_cast<int>(obs.queue_per_approach.size()))
                sum += obs.queue_per_approach[static_cast<std::size_t>(a)];
        }
        if (sum > best_sum)
        {
            best_sum = sum;
            best = static_cast<int>(p);
        }
    }
    return best;
}

llm::ChatResponse GreedySurrogateBackend::do_complete(const llm::ChatRequest& request)
{
    const std::string prompt(request.last_user_message());
    std::string user;
    for (const auto& m: request.messages)
        if (m.role == llm::Role::user && m.content.find("Observation: ") != std::string::npos)
            user = m.content;
    const auto at = user.find("Observation: ");
    if (at == std::string::npos)
        fail(Errc::BackendError, "greedy surrogate needs an 'Observation:' line in the prompt");
    auto line = user.substr(at + 13);
    line = line.substr(0, line.find('\n'));
    const auto obs = json::parse(line, nullptr, false);
    if (obs.is_discarded() || !obs.contains("queues") || !obs.contains("phase_approaches"))
        fail(Errc::BackendError, "greedy surrogate could not read the observation");
    const auto queues = obs.at("queues").get<std::vector<int>>();
    int best = 0;
    long best_sum = -1;
    const auto& phases = obs.at("phase_approaches");
    for (std::size_t p = 0; p < phases.size(); ++p)
    {
        long sum = 0;
        for (const auto& a: phases[p])
        {
            const auto i = a.get<int>();
            if (i >= 0 && i < static_cast<int>(queues.size()))
                sum += queues[static_cast<std::size_t>(i)];
        }
        if (sum > best_sum)
        {
            best_sum = sum;
            best = static_cast<int>(p);
        }
    }
    llm::ChatResponse r;
    r.content = "PHASE: " + std::to_string(best) + " - it serves the largest queue (" + std::to_string(best_sum) +
                " vehicles).";
    r.usage = {llm::approx_tokens(prompt), llm::approx_tokens(r.content)};
    return r;
}

json LogEntry::to_json() const
{
    return {{"t", t}, {"intersection", intersection}, {"obs", obs}, {"action", action}, {"explanation", explanation},
            {"fallback", fallback}};
}

ChatZeroController::ChatZeroController(PolicyBrief brief, llm::LlmBackend& llm, std::string model_id)
    : _brief(std::move(brief)), _llm(llm), _model(std::move(model_id))
{
    _brief.validate();
}

void ChatZeroController::begin_episode(const sim::Scenario&)
{
    _log.clear();
    _fallbacks = 0;
}

sim::TscAction ChatZeroController::act(const sim::TscObservation& obs, const network::SignalizedIntersection& intersection)
{
    auto r = zero_step(obs, intersection, _brief, _llm, _model);
    if (r.fallback_used)
        ++_fallbacks;
    _log.push_back({obs.sim_time_s, obs.intersection_id, observation_json(obs, intersection), r.action.phase_index,
                    r.explanation, r.fallback_used});
    return r.action;
}

void write_log_jsonl(const std::vector<LogEntry>& log, const std::filesystem::path& path)
{
    std::string out;
    for (const auto& e: log)
        out += e.to_json().dump() + "\n";
    write_file(path.string(), out);
}

ChatZeroRun run_chatzero(const sim::Scenario& scenario, const PolicyBrief& brief, llm::LlmBackend& agent,
                         const std::string& model_id, const std::optional<std::filesystem::path>& out_dir)
{
    scenario.validate();
    ChatZeroController controller(brief, agent, model_id);
    ChatZeroRun out;
    out.metrics = sim::run(scenario, controller).second;
    out.log = controller.log();
    out.fallback_rate = out.log.empty() ? 0.0 : static_cast<double>(controller.fallbacks()) / static_cast<double>(out.log.size());
    if (out_dir)
    {
        std::filesystem::create_directories(*out_dir);
        out.log_path = *out_dir / "chatzero_log.jsonl";
        write_log_jsonl(out.log, out.log_path);
    }
    return out;
}

} // namespace openti::chatzero
