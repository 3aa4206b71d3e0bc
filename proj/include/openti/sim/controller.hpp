// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <openti/network/network.hpp>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace openti::sim
{

struct Scenario;

struct TscObservation
{
    std::int64_t intersection_id = 0;
    std::vector<int> queue_per_approach; // aligned with SignalizedIntersection::approaches
    int current_phase = 0;               // the pending phase during all-red
    int sim_time_s = 0;
    int time_in_phase_s = 0; // seconds of green so far, 0 during all-red
    bool in_transition = false;
};

struct TscAction
{
    int phase_index = 0;
};

/// One instance drives every intersection of a run; implementations keep
/// per-intersection state keyed by id.
class SignalController
{
public:
    virtual ~SignalController() = default;
    [[nodiscard]] virtual std::string name() const = 0;
    virtual void begin_episode(const Scenario& scenario) {}
    virtual TscAction act(const TscObservation& obs, const network::SignalizedIntersection& intersection) = 0;
    virtual void end_episode() {}
};

using ControlFunction = std::function<TscAction(const TscObservation&, const network::SignalizedIntersection&)>;

class FunctionController final : public SignalController
{
public:
    explicit FunctionController(ControlFunction fn, std::string name = "function");
    [[nodiscard]] std::string name() const override { return _name; }
    TscAction act(const TscObservation& obs, const network::SignalizedIntersection& intersection) override;

private:
    ControlFunction _fn;
    std::string _name;
};

} // namespace openti::sim
