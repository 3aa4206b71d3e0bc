// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <openti/sim/controller.hpp>
#include <openti/sim/metrics.hpp>
#include <openti/sim/scenario.hpp>

#include <cstdint>
#include <deque>
#include <optional>
#include <utility>
#include <vector>

namespace openti::sim
{

constexpr int kAllRedSeconds = 3;

struct VehicleRecord
{
    int trip = 0;
    int depart_s = 0;
    int arrive_s = -1;
    int free_flow_s = 0;
    int discharges = 0; // queue exits so far
};

struct PhaseChange
{
    int time_s = 0;
    std::int64_t intersection_id = 0;
    int from_phase = 0;
    int to_phase = 0;
};

struct DecisionSample
{
    int time_s = 0;
    int total_queue = 0;
};

struct SimResult
{
    std::vector<VehicleRecord> vehicles; // departed vehicles in departure order
    std::vector<PhaseChange> phase_changes;
    std::vector<DecisionSample> decisions;
    std::vector<std::pair<int, int>> discharge_log; // (time, vehicle) for every queue exit
    int departed = 0;
    int arrived = 0;
    int horizon_s = 0;
};

/// Point-queue simulation in 1-s steps. Each step: departures enter their
/// first link, finished traversals join exit queues (or arrive), all-red
/// transitions complete, controllers are consulted on decision steps, then
/// queues discharge.
class Simulator
{
public:
    Simulator(const Scenario& scenario, SignalController& controller, std::optional<int> horizon = std::nullopt);

    [[nodiscard]] bool done() const noexcept { return _t >= _horizon; }
    void step();
    void run_to_end();

    [[nodiscard]] int time() const noexcept { return _t; }
    [[nodiscard]] int departed() const noexcept { return _result.departed; }
    [[nodiscard]] int arrived() const noexcept { return _result.arrived; }
    [[nodiscard]] int in_network() const noexcept { return _in_network; }
    [[nodiscard]] int total_queued() const noexcept;

    [[nodiscard]] const SimResult& result() const noexcept { return _result; }
    [[nodiscard]] MetricsReport metrics() const;

private:
    struct Vehicle
    {
        int trip = 0;
        int route = 0;
        int pos = 0; // index into route links
        int ready_s = 0;
    };
    struct LinkState
    {
        std::deque<int> moving; // vehicle ids, FIFO by ready time
        std::deque<int> queue;
        double credit = 0.0;
        double rate = 0.0;
        int signal = -1; // index into _signals
        std::int64_t id = 0;
    };
    struct SignalState
    {
        const network::SignalizedIntersection* si = nullptr;
        int phase = 0;
        int green_start = 0;
        int transition_end = -1; // all-red until this second, -1 when green
    };

    void enter(int vehicle, std::size_t link_index);
    void decide();

    const Scenario& _scenario;
    SignalController& _controller;
    int _horizon = 0;
    int _t = 0;
    std::size_t _next_trip = 0;
    int _in_network = 0;
    std::vector<Vehicle> _vehicles;
    std::vector<LinkState> _links;
    std::vector<SignalState> _signals;
    std::vector<std::vector<int>> _counts; // link index -> hour index
    std::vector<char> _counted;            // links reported in per_link_counts
    double _queue_integral = 0.0;
    double _reward = 0.0;
    SimResult _result;
};

/// Runs to the horizon and computes metrics.
std::pair<SimResult, MetricsReport> run(const Scenario& scenario, SignalController& controller,
                                        std::optional<int> horizon = std::nullopt);

} // namespace openti::sim
