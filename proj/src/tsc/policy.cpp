// SPDX-License-Identifier: Apache-2.0
#include <openti/core/error.hpp>
#include <openti/core/text.hpp>
#include <openti/sim/scenario.hpp>
#include <openti/tsc/policy.hpp>

#include <algorithm>
#include <cmath>

namespace openti::tsc
{

using nlohmann::json;

std::string_view to_string(PolicyKind kind) noexcept
{
    switch (kind)
    {
    case PolicyKind::fixedtime: return "fixedtime";
    case PolicyKind::sotl: return "sotl";
    case PolicyKind::qlearning: return "qlearning";
    case PolicyKind::chatzero: return "chatzero";
    }
    return "fixedtime";
}

PolicyKind policy_kind_from_string(std::string_view s)
{
    std::string k;
    for (char c: to_lower(trim(s)))
        if (c != '_' && c != '-' && c != ' ')
            k += c;
    if (k == "fixedtime")
        return PolicyKind::fixedtime;
    if (k == "sotl")
        return PolicyKind::sotl;
    if (k == "qlearning" || k == "ql")
        return PolicyKind::qlearning;
    if (k == "chatzero")
        return PolicyKind::chatzero;
    fail(Errc::InvalidSpec, "unknown policy '" + std::string(s) + "' (fixedtime, sotl, qlearning, chatzero)", {"kind"});
}

namespace
{

const std::map<std::string, double>& defaults(PolicyKind kind)
{
    static const std::map<std::string, double> ft {{"green_s", 30}};
    static const std::map<std::string, double> sotl {{"theta", 30}, {"min_green_s", 10}, {"mu", 3}};
    static const std::map<std::string, double> ql {
        {"alpha", 0.1}, {"gamma", 0.95}, {"epsilon0", 0.2}, {"epsilon_decay", 0.995}};
    static const std::map<std::string, double> none;
    switch (kind)
    {
    case PolicyKind::fixedtime: return ft;
    case PolicyKind::sotl: return sotl;
    case PolicyKind::qlearning: return ql;
    case PolicyKind::chatzero: return none;
    }
    return none;
}

[[noreturn]] void bad(const std::string& param, const std::string& why)
{
    fail(Errc::InvalidSpec, "policy parameter '" + param + "' " + why, {param});
}

} // namespace

double PolicySpec::number(const std::string& name) const
{
    if (params.is_object() && params.contains(name))
    {
        const auto& v = params.at(name);
        if (!v.is_number())
            bad(name, "must be a number");
        return v.get<double>();
    }
    const auto& d = defaults(kind);
    auto it = d.find(name);
    if (it == d.end())
        bad(name, "is not defined for " + std::string(to_string(kind)));
    return it->second;
}

std::vector<int> PolicySpec::bins() const
{
    if (!params.is_object() || !params.contains("bins"))
        return {0, 1, 4, 8};
    const auto& b = params.at("bins");
    if (!b.is_array() || b.empty())
        bad("bins", "must be a non-empty list");
    std::vector<int> out;
    for (const auto& v: b)
    {
        if (!v.is_number_integer())
            bad("bins", "must hold integers");
        out.push_back(v.get<int>());
    }
    return out;
}

void PolicySpec::validate() const
{
    if (!params.is_object())
        fail(Errc::InvalidSpec, "policy params must be an object", {"params"});
    const auto& d = defaults(kind);
    for (const auto& [k, v]: params.items())
        if (!d.count(k) && !(kind == PolicyKind::qlearning && k == "bins") &&
            !(kind == PolicyKind::chatzero && (k == "brief" || k == "backend")))
            bad(k, "is not defined for " + std::string(to_string(kind)));
    switch (kind)
    {
    case PolicyKind::fixedtime:
        if (number("green_s") < 1 || number("green_s") > 600 || std::floor(number("green_s")) != number("green_s"))
            bad("green_s", "must be an integer in [1, 600]");
        break;
    case PolicyKind::sotl:
        if (!(number("theta") > 0))
            bad("theta", "must be positive");
        if (number("min_green_s") < 0 || std::floor(number("min_green_s")) != number("min_green_s"))
            bad("min_green_s", "must be a non-negative integer");
        if (number("mu") < 0 || std::floor(number("mu")) != number("mu"))
            bad("mu", "must be a non-negative integer");
        break;
    case PolicyKind::qlearning:
    {
        if (!(number("alpha") > 0 && number("alpha") <= 1))
            bad("alpha", "must be in (0, 1]");
        if (!(number("gamma") >= 0 && number("gamma") <= 1))
            bad("gamma", "must be in [0, 1]");
        if (!(number("epsilon0") >= 0 && number("epsilon0") <= 1))
            bad("epsilon0", "must be in [0, 1]");
        if (!(number("epsilon_decay") > 0 && number("epsilon_decay") <= 1))
            bad("epsilon_decay", "must be in (0, 1]");
        const auto b = bins();
        if (b.front() != 0 || !std::is_sorted(b.begin(), b.end()) ||
            std::adjacent_find(b.begin(), b.end()) != b.end())
            bad("bins", "must start at 0 and increase strictly");
        break;
    }
    case PolicyKind::chatzero:
        if (!params.contains("brief"))
            fail(Errc::InvalidSpec, "chatzero policy needs a 'brief'", {"brief"});
        break;
    }
}

json PolicySpec::to_json() const
{
    return {{"kind", to_string(kind)}, {"params", params}};
}

PolicySpec PolicySpec::from_json(const json& j)
{
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
        fail(Errc::InvalidSpec, "policy spec needs a string 'kind'", {"kind"});
    PolicySpec s;
    s.kind = policy_kind_from_string(j.at("kind").get<std::string>());
    if (j.contains("params"))
        s.params = j.at("params");
    s.validate();
    return s;
}

FixedTimeController::FixedTimeController(int green_s)
    : _green_s(green_s)
{
    require(green_s >= 1, "green_s must be at least 1");
}

sim::TscAction FixedTimeController::act(const sim::TscObservation& obs, const network::SignalizedIntersection& si)
{
    if (!obs.in_transition && obs.time_in_phase_s >= _green_s)
        return {static_cast<int>((obs.current_phase + 1) % si.phases.size())};
    return {obs.current_phase};
}

SotlController::SotlController(double theta, int min_green_s, int mu)
    : _theta(theta)
    , _min_green_s(min_green_s)
    , _mu(mu)
{
    require(theta > 0 && min_green_s >= 0 && mu >= 0, "bad SOTL parameters");
}

void SotlController::begin_episode(const sim::Scenario&)
{
    _state.clear();
}

sim::TscAction SotlController::act(const sim::TscObservation& obs, const network::SignalizedIntersection& si)
{
    auto& st = _state[obs.intersection_id];
    const int dt = st.last_t < 0 ? 0 : obs.sim_time_s - st.last_t;
    st.last_t = obs.sim_time_s;
    if (obs.in_transition)
        return {obs.current_phase};
    const auto& green = si.phases[static_cast<std::size_t>(obs.current_phase)].approaches;
    int red_queue = 0, green_queue = 0;
    for (std::size_t i = 0; i < si.approaches.size(); ++i)
    {
        const bool on_green = std::find(green.begin(), green.end(), si.approaches[i]) != green.end();
        (on_green ? green_queue : red_queue) += obs.queue_per_approach[i];
    }
    st.kappa += static_cast<double>(red_queue) * dt;
    if (st.kappa >= _theta && obs.time_in_phase_s >= _min_green_s && green_queue <= _mu)
    {
        st.kappa = 0.0;
        return {static_cast<int>((obs.current_phase + 1) % si.phases.size())};
    }
    return {obs.current_phase};
}

QLearningController::QLearningController(Params params)
    : _params(std::move(params))
    , _epsilon(_params.epsilon0)
{
    require(!_params.bins.empty() && _params.bins.front() == 0, "bins must start at 0");
}

void QLearningController::set_episode(std::uint64_t seed, int episode)
{
    _rng.seed(seed + static_cast<std::uint64_t>(episode));
    _epsilon = _params.epsilon0 * std::pow(_params.epsilon_decay, episode);
}

void QLearningController::begin_episode(const sim::Scenario&)
{
    _pending.clear();
}

int QLearningController::bucket(int queue) const noexcept
{
    int b = 0;
    for (std::size_t i = 0; i < _params.bins.size(); ++i)
        if (queue >= _params.bins[i])
            b = static_cast<int>(i);
    return b;
}

std::string QLearningController::state_key(const sim::TscObservation& obs) const
{
    std::string k = std::to_string(obs.current_phase) + "|";
    for (std::size_t i = 0; i < obs.queue_per_approach.size(); ++i)
    {
        if (i)
            k += ',';
        k += std::to_string(bucket(obs.queue_per_approach[i]));
    }
    return k;
}

sim::TscAction QLearningController::act(const sim::TscObservation& obs, const network::SignalizedIntersection& si)
{
    const std::size_t n = si.phases.size();
    auto& table = _q[obs.intersection_id];
    const auto key = state_key(obs);
    auto& q = table[key];
    if (q.size() != n)
        q.assign(n, 0.0);

    auto& pending = _pending[obs.intersection_id];
    if (_learning && pending.action >= 0)
    {
        int queue = 0;
        for (int v: obs.queue_per_approach)
            queue += v;
        const double r = -static_cast<double>(queue);
        auto& prev = table[pending.key][static_cast<std::size_t>(pending.action)];
        prev += _params.alpha * (r + _params.gamma * *std::max_element(q.begin(), q.end()) - prev);
    }

    int action = static_cast<int>(std::max_element(q.begin(), q.end()) - q.begin()); // first max
    if (_epsilon > 0.0)
    {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        if (u(_rng) < _epsilon)
            action = static_cast<int>(std::uniform_int_distribution<std::size_t>(0, n - 1)(_rng));
    }
    pending = {key, action};
    return {action};
}

const std::vector<double>* QLearningController::q_values(std::int64_t intersection, const std::string& key) const
{
    auto t = _q.find(intersection);
    if (t == _q.end())
        return nullptr;
    auto it = t->second.find(key);
    return it == t->second.end() ? nullptr : &it->second;
}

std::size_t QLearningController::table_size() const noexcept
{
    std::size_t n = 0;
    for (const auto& [id, t]: _q)
        n += t.size();
    return n;
}

bool QLearningController::all_finite() const noexcept
{
    for (const auto& [id, t]: _q)
        for (const auto& [k, q]: t)
            for (double v: q)
                if (!std::isfinite(v))
                    return false;
    return true;
}

json QLearningController::checkpoint() const
{
    json j = json::object();
    for (const auto& [id, t]: _q)
        for (const auto& [k, q]: t)
            j[std::to_string(id) + "|" + k] = q;
    return j;
}

void QLearningController::load_checkpoint(const json& j)
{
    if (!j.is_object())
        fail(Errc::SchemaError, "checkpoint must be an object");
    _q.clear();
    for (const auto& [key, q]: j.items())
    {
        const auto bar = key.find('|');
        if (bar == std::string::npos || !q.is_array())
            fail(Errc::SchemaError, "bad checkpoint entry '" + key + "'");
        std::int64_t id = 0;
        try
        {
            id = std::stoll(key.substr(0, bar));
        }
        catch (const std::exception&)
        {
            fail(Errc::SchemaError, "bad checkpoint intersection in '" + key + "'");
        }
        std::vector<double> values;
        for (const auto& v: q)
        {
            if (!v.is_number())
                fail(Errc::SchemaError, "checkpoint values must be numbers");
            values.push_back(v.get<double>());
        }
        _q[id][key.substr(bar + 1)] = std::move(values);
    }
}

QLearningController::Params qlearning_params(const PolicySpec& spec)
{
    QLearningController::Params p;
    p.alpha = spec.number("alpha");
    p.gamma = spec.number("gamma");
    p.epsilon0 = spec.number("epsilon0");
    p.epsilon_decay = spec.number("epsilon_decay");
    p.bins = spec.bins();
    return p;
}

std::unique_ptr<sim::SignalController> make_policy(const PolicySpec& spec)
{
    spec.validate();
    switch (spec.kind)
    {
    case PolicyKind::fixedtime: return std::make_unique<FixedTimeController>(static_cast<int>(spec.number("green_s")));
    case PolicyKind::sotl:
        return std::make_unique<SotlController>(spec.number("theta"), static_cast<int>(spec.number("min_green_s")),
                                                static_cast<int>(spec.number("mu")));
    case PolicyKind::qlearning: return std::make_unique<QLearningController>(qlearning_params(spec));
    case PolicyKind::chatzero: break;
    }
    fail(Errc::InvalidSpec, "chatzero controllers are built from a policy brief, not make_policy", {"kind"});
}

} // namespace openti::tsc
