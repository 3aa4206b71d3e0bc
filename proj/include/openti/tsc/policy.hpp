// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <openti/sim/controller.hpp>

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace openti::tsc
{

enum class PolicyKind
{
    fixedtime,
    sotl,
    qlearning,
    chatzero,
};

std::string_view to_string(PolicyKind kind) noexcept;
/// Case-insensitive; "fixed_time", "fixed-time" and "fixed time" also name fixedtime. Throws InvalidSpec.
PolicyKind policy_kind_from_string(std::string_view s);

struct PolicySpec
{
    PolicyKind kind = PolicyKind::fixedtime;
    nlohmann::json params = nlohmann::json::object();

    /// Numeric parameter or its documented default.
    [[nodiscard]] double number(const std::string& name) const;
    [[nodiscard]] std::vector<int> bins() const;
    /// Throws InvalidSpec naming the offending parameter.
    void validate() const;
    [[nodiscard]] nlohmann::json to_json() const;
    static PolicySpec from_json(const nlohmann::json& j);
};

/// Cycles phases after `green_s` seconds of green.
class FixedTimeController final : public sim::SignalController
{
public:
    explicit FixedTimeController(int green_s = 30);
    [[nodiscard]] std::string name() const override { return "fixedtime"; }
    sim::TscAction act(const sim::TscObservation& obs, const network::SignalizedIntersection& si) override;

private:
    int _green_s;
};

/// Self-organizing lights: red-side demand accumulates as queue x seconds;
/// the phase advances once it reaches theta, the green has lasted min_green
/// and at most mu vehicles wait on the green side.
class SotlController final : public sim::SignalController
{
public:
    SotlController(double theta = 30.0, int min_green_s = 10, int mu = 3);
    [[nodiscard]] std::string name() const override { return "sotl"; }
    void begin_episode(const sim::Scenario& scenario) override;
    sim::TscAction act(const sim::TscObservation& obs, const network::SignalizedIntersection& si) override;

private:
    struct State
    {
        double kappa = 0.0;
        int last_t = -1;
    };
    double _theta;
    int _min_green_s;
    int _mu;
    std::map<std::int64_t, State> _state;
};

/// Tabular Q-learning, one table per intersection. State = current phase
/// plus each approach queue bucketed by `bins`; reward = minus the queue sum
/// at the intersection on the next decision.
class QLearningController final : public sim::SignalController
{
public:
    struct Params
    {
        double alpha = 0.1;
        double gamma = 0.95;
        double epsilon0 = 0.2;
        double epsilon_decay = 0.995;
        std::vector<int> bins {0, 1, 4, 8};
    };

    explicit QLearningController(Params params);
    [[nodiscard]] std::string name() const override { return "qlearning"; }

    /// Seeds exploration with `seed + episode` and sets epsilon0 * decay^episode.
    void set_episode(std::uint64_t seed, int episode);
    void set_learning(bool on) noexcept { _learning = on; }
    void set_epsilon(double eps) noexcept { _epsilon = eps; }
    [[nodiscard]] double epsilon() const noexcept { return _epsilon; }

    void begin_episode(const sim::Scenario& scenario) override;
    sim::TscAction act(const sim::TscObservation& obs, const network::SignalizedIntersection& si) override;

    [[nodiscard]] std::string state_key(const sim::TscObservation& obs) const;
    [[nodiscard]] int bucket(int queue) const noexcept;
    /// Q-values for a state key, or nullptr if never visited.
    [[nodiscard]] const std::vector<double>* q_values(std::int64_t intersection, const std::string& key) const;
    [[nodiscard]] std::size_t table_size() const noexcept;
    [[nodiscard]] bool all_finite() const noexcept;

    /// `{"<intersection>|<state>": [q...], ...}`
    [[nodiscard]] nlohmann::json checkpoint() const;
    void load_checkpoint(const nlohmann::json& j);
    [[nodiscard]] const Params& params() const noexcept { return _params; }

private:
    struct Pending
    {
        std::string key;
        int action = -1;
    };
    Params _params;
    double _epsilon;
    bool _learning = true;
    std::mt19937_64 _rng;
    std::map<std::int64_t, std::map<std::string, std::vector<double>>> _q;
    std::map<std::int64_t, Pending> _pending;
};

QLearningController::Params qlearning_params(const PolicySpec& spec);

/// fixedtime, sotl or qlearning (an untrained table). chatzero controllers
/// are built by the chatzero module. Throws InvalidSpec.
std::unique_ptr<sim::SignalController> make_policy(const PolicySpec& spec);

} // namespace openti::tsc
