// SPDX-License-Identifier: Apache-2.0
#include <openti/core/error.hpp>
#include <openti/sim/simulator.hpp>

#include <algorithm>
#include <set>

namespace openti::sim
{

Simulator::Simulator(const Scenario& scenario, SignalController& controller, std::optional<int> horizon)
    : _scenario(scenario)
    , _controller(controller)
{
    scenario.validate();
    _horizon = horizon.value_or(scenario.horizon_s);
    require(_horizon > 0, "horizon must be positive");
    _result.horizon_s = _horizon;

    const auto& net = scenario.network;
    _links.resize(net.links().size());
    for (std::size_t i = 0; i < net.links().size(); ++i)
    {
        const auto& l = net.links()[i];
        _links[i].id = l.id;
        _links[i].rate = scenario.saturation_rate * l.lanes;
    }
    for (const auto& si: net.intersections())
    {
        for (auto a: si.approaches)
            _links[net.link_index(a)].signal = static_cast<int>(_signals.size());
        _signals.push_back({&si, 0, 0, -1});
    }

    const std::size_t hours = static_cast<std::size_t>((_horizon + 3599) / 3600);
    _counts.assign(_links.size(), std::vector<int>(hours, 0));
    _counted.assign(_links.size(), 0);
    for (auto id: scenario.observed_links)
        _counted[net.link_index(id)] = 1;

    _controller.begin_episode(scenario);
}

int Simulator::total_queued() const noexcept
{
    int q = 0;
    for (const auto& l: _links)
        q += static_cast<int>(l.queue.size());
    return q;
}

void Simulator::enter(int v, std::size_t li)
{
    auto& veh = _vehicles[v];
    const auto& link = _scenario.network.links()[li];
    veh.ready_s = _t + free_flow_time_s(link);
    _links[li].moving.push_back(v);
    ++_counts[li][static_cast<std::size_t>(_t / 3600)];
    if (_scenario.observed_links.empty())
        _counted[li] = 1;
}

void Simulator::decide()
{
    const int queued = total_queued();
    _result.decisions.push_back({_t, queued});
    _reward -= queued;
    const auto& net = _scenario.network;
    for (auto& s: _signals)
    {
        TscObservation obs;
        obs.intersection_id = s.si->node_id;
        obs.sim_time_s = _t;
        obs.current_phase = s.phase;
        obs.in_transition = s.transition_end >= 0;
        obs.time_in_phase_s = obs.in_transition ? 0 : _t - s.green_start;
        for (auto a: s.si->approaches)
            obs.queue_per_approach.push_back(static_cast<int>(_links[net.link_index(a)].queue.size()));
        const auto action = _controller.act(obs, *s.si);
        if (action.phase_index < 0 || action.phase_index >= static_cast<int>(s.si->phases.size()))
            fail(Errc::ControllerError,
                 "controller '" + _controller.name() + "' chose phase " + std::to_string(action.phase_index) +
                     " at intersection " + std::to_string(s.si->node_id) + " (t=" + std::to_string(_t) +
                     "s), which has " + std::to_string(s.si->phases.size()) + " phases",
                 {std::to_string(s.si->node_id), std::to_string(action.phase_index)});
        if (action.phase_index != s.phase)
        {
            _result.phase_changes.push_back({_t, s.si->node_id, s.phase, action.phase_index});
            s.phase = action.phase_index;
            s.transition_end = _t + kAllRedSeconds;
        }
    }
}

void Simulator::step()
{
    if (done())
        return;
    const auto& net = _scenario.network;

    // Departures.
    while (_next_trip < _scenario.trips.size() && _scenario.trips[_next_trip].depart_s <= _t)
    {
        const auto& trip = _scenario.trips[_next_trip];
        const int v = static_cast<int>(_vehicles.size());
        _vehicles.push_back({static_cast<int>(_next_trip), trip.route, 0, 0});
        _result.vehicles.push_back({static_cast<int>(_next_trip), _t, -1, _scenario.routes[trip.route].free_flow_s, 0});
        ++_result.departed;
        ++_in_network;
        enter(v, net.link_index(_scenario.routes[trip.route].links.front()));
        ++_next_trip;
    }

    // Traversals finishing this second.
    for (auto& ls: _links)
        while (!ls.moving.empty() && _vehicles[ls.moving.front()].ready_s <= _t)
        {
            const int v = ls.moving.front();
            ls.moving.pop_front();
            const auto& route = _scenario.routes[_vehicles[v].route];
            if (_vehicles[v].pos + 1 == static_cast<int>(route.links.size()))
            {
                _result.vehicles[v].arrive_s = _t;
                ++_result.arrived;
                --_in_network;
            }
            else
                ls.queue.push_back(v);
        }

    for (auto& s: _signals)
        if (s.transition_end >= 0 && _t >= s.transition_end)
        {
            s.transition_end = -1;
            s.green_start = _t;
        }

    if (_t % _scenario.decision_interval_s == 0)
        decide();

    // Discharge.
    std::vector<std::pair<int, std::size_t>> moved;
    for (std::size_t li = 0; li < _links.size(); ++li)
    {
        auto& ls = _links[li];
        const SignalState* sig = ls.signal >= 0 ? &_signals[static_cast<std::size_t>(ls.signal)] : nullptr;
        auto next_of = [&](int v) {
            const auto& route = _scenario.routes[_vehicles[v].route];
            return route.links[static_cast<std::size_t>(_vehicles[v].pos) + 1];
        };
        auto served = [&](int v) {
            if (!sig)
                return true;
            return sig->transition_end < 0 && sig->si->serves(static_cast<std::size_t>(sig->phase), ls.id, next_of(v));
        };
        if (ls.queue.empty() || !served(ls.queue.front()))
        {
            ls.credit = 0.0;
            continue;
        }
        while (ls.credit >= 1.0 && !ls.queue.empty() && served(ls.queue.front()))
        {
            const int v = ls.queue.front();
            ls.queue.pop_front();
            ls.credit -= 1.0;
            moved.push_back({v, net.link_index(next_of(v))});
        }
        ls.credit += ls.rate;
    }
    for (auto [v, li]: moved)
    {
        ++_vehicles[v].pos;
        ++_result.vehicles[v].discharges;
        _result.discharge_log.push_back({_t, v});
        enter(v, li);
    }

    _queue_integral += total_queued();
    ++_t;
}

void Simulator::run_to_end()
{
    while (!done())
        step();
    _controller.end_episode();
}

MetricsReport Simulator::metrics() const
{
    MetricsReport m;
    double travel = 0.0, delay = 0.0;
    for (const auto& v: _result.vehicles)
        if (v.arrive_s >= 0)
        {
            travel += v.arrive_s - v.depart_s;
            delay += v.arrive_s - v.depart_s - v.free_flow_s;
        }
    m.throughput = _result.arrived;
    m.no_arrivals = _result.arrived == 0;
    if (_result.arrived > 0)
    {
        m.att_s = travel / _result.arrived;
        m.avg_delay_s = delay / _result.arrived;
    }
    m.avg_queue = _t > 0 ? _queue_integral / _t : 0.0;
    m.total_reward = _reward;
    for (std::size_t li = 0; li < _links.size(); ++li)
    {
        if (!_counted[li])
            continue;
        auto& row = m.per_link_counts[_links[li].id];
        for (std::size_t h = 0; h < _counts[li].size(); ++h)
            row[_scenario.hour_label(static_cast<int>(h) * 3600)] = _counts[li][h];
    }
    return m;
}

std::pair<SimResult, MetricsReport> run(const Scenario& scenario, SignalController& controller,
                                        std::optional<int> horizon)
{
    Simulator sim(scenario, controller, horizon);
    sim.run_to_end();
    return {sim.result(), sim.metrics()};
}

} // namespace openti::sim
