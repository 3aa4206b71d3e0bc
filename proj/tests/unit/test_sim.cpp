// SPDX-License-Identifier: Apache-2.0
#include "support.hpp"

#include <doctest.h>

#include <openti/core/error.hpp>
#include <openti/core/text.hpp>
#include <openti/network/synthetic.hpp>
#include <openti/sim/external.hpp>
#include <openti/sim/simulator.hpp>
#include <openti/sim/synthetic.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <set>

using namespace openti;
using namespace openti::sim;
using openti::test::TempDir;

namespace
{

FunctionController keep(int phase)
{
    return FunctionController([phase](const TscObservation&, const network::SignalizedIntersection&) {
        return TscAction {phase};
    });
}

// Cycles phases every `green` seconds of green.
FunctionController cycle(int green)
{
    return FunctionController([green](const TscObservation& o, const network::SignalizedIntersection& si) {
        if (!o.in_transition && o.time_in_phase_s >= green)
            return TscAction {static_cast<int>((o.current_phase + 1) % si.phases.size())};
        return TscAction {o.current_phase};
    });
}

network::RoadNetwork single_link(double length, double speed)
{
    network::RoadNetwork net;
    net.add_node({1, 0.0, 0.0, network::Control::none});
    net.add_node({2, 0.005, 0.0, network::Control::none});
    net.add_link({1, 1, 2, length, 1, speed, {network::Mode::drive}});
    return net;
}

std::int64_t link_between(const network::RoadNetwork& net, std::int64_t a, std::int64_t b)
{
    for (const auto& l: net.links())
        if (l.from == a && l.to == b)
            return l.id;
    return 0;
}

// Terminal of the single-intersection grid lying furthest in a direction.
std::int64_t terminal(const network::RoadNetwork& net, double dlon, double dlat)
{
    std::int64_t best = 0;
    double score = -1e9;
    const auto c = net.node(1).pos();
    for (const auto& [id, n]: net.nodes())
    {
        if (id == 1)
            continue;
        const double s = (n.lon - c.lon) * dlon + (n.lat - c.lat) * dlat;
        if (s > score)
        {
            score = s;
            best = id;
        }
    }
    return best;
}

// Exhaustive search over simple paths: minimal integer time, then the
// lexicographically smallest link-id sequence.
std::optional<std::vector<std::int64_t>> brute_force_path(const network::RoadNetwork& net, std::int64_t from,
                                                          std::int64_t to)
{
    std::optional<std::pair<long, std::vector<std::int64_t>>> best;
    std::vector<std::int64_t> path;
    std::set<std::int64_t> visited {from};
    std::function<void(std::int64_t, long)> dfs = [&](std::int64_t at, long cost) {
        if (at == to)
        {
            if (!best || cost < best->first || (cost == best->first && path < best->second))
                best = {cost, path};
            return;
        }
        for (auto lid: net.out_links(at))
        {
            const auto& l = net.link(lid);
            if (!l.modes.contains(network::Mode::drive) || visited.count(l.to))
                continue;
            visited.insert(l.to);
            path.push_back(lid);
            dfs(l.to, cost + free_flow_time_s(l));
            path.pop_back();
            visited.erase(l.to);
        }
    };
    dfs(from, 0);
    if (!best)
        return std::nullopt;
    return best->second;
}

} // namespace

TEST_CASE("free-flow traversal of a single link")
{
    auto s = make_trip_scenario(single_link(500.0, 10.0), {{0, {1}}}, {});
    auto c = keep(0);
    const auto [res, m] = run(s, c);
    CHECK(m.att_s == 50.0);
    CHECK(m.throughput == 1);
    CHECK(m.avg_delay_s == 0.0);
    CHECK_FALSE(m.no_arrivals);
    CHECK(res.vehicles.at(0).arrive_s == 50);
    CHECK(m.per_link_counts.at(1).at(0) == 1);
    // Partial seconds round up.
    CHECK(free_flow_time_s({1, 1, 2, 501.0, 1, 10.0, {}}) == 51);
}

TEST_CASE("saturation discharge of a queued platoon matches a step-loop oracle")
{
    const auto net = network::make_grid_network({});
    const auto north = terminal(net, 0, 1), south = terminal(net, 0, -1);
    const auto in = link_between(net, north, 1), out = link_between(net, 1, south);
    REQUIRE(net.intersections().size() == 1);
    const auto& si = net.intersections()[0];
    int ns_phase = -1;
    for (std::size_t p = 0; p < si.phases.size(); ++p)
        if (si.serves(p, in, out))
            ns_phase = static_cast<int>(p);
    REQUIRE(ns_phase >= 0);
    const int other = ns_phase == 0 ? 1 : 0;

    std::vector<ManualTrip> trips(10, ManualTrip {0, {in, out}});
    ScenarioSettings settings;
    settings.decision_interval_s = 1;
    settings.horizon_s = 600;
    auto s = make_trip_scenario(net, trips, settings);
    const int tt_in = free_flow_time_s(net.link(in)), tt_out = free_flow_time_s(net.link(out));
    const int switch_at = tt_in + 12; // queue complete well before the switch
    FunctionController c([&](const TscObservation& o, const network::SignalizedIntersection&) {
        return TscAction {o.sim_time_s < switch_at ? other : ns_phase};
    });
    const auto [res, m] = run(s, c);
    const int green = switch_at + kAllRedSeconds;

    // Oracle: the platoon sits at the stop line; from green onward a credit
    // counter is checked for a whole vehicle and then topped up by 0.5.
    std::vector<int> oracle_exit;
    double credit = 0.0;
    int waiting = 10;
    for (int t = green; waiting > 0; ++t)
    {
        if (credit >= 1.0)
        {
            credit -= 1.0;
            --waiting;
            oracle_exit.push_back(t);
        }
        credit += 0.5;
    }
    REQUIRE(res.discharge_log.size() == 10);
    for (int k = 0; k < 10; ++k)
    {
        CHECK(res.discharge_log[k].first == oracle_exit[k]);
        const auto& v = res.vehicles[res.discharge_log[k].second];
        CHECK(v.arrive_s - v.depart_s - v.free_flow_s == oracle_exit[k] - tt_in);
        CHECK(v.arrive_s == oracle_exit[k] + tt_out);
    }
    CHECK(oracle_exit.back() - green == 20);
    double platoon = 0.0;
    for (int t: oracle_exit)
        platoon += t - green;
    CHECK(platoon / 10 == doctest::Approx(11.0));
    CHECK(m.throughput == 10);
}

TEST_CASE("zero demand")
{
    auto s = make_single_intersection_scenario(0.0, 0.0);
    auto c = cycle(30);
    const auto [res, m] = run(s, c);
    CHECK(m.throughput == 0);
    CHECK(m.total_reward == 0.0);
    CHECK(m.att_s == 0.0);
    CHECK(m.no_arrivals);
    CHECK(res.departed == 0);
}

TEST_CASE("departure schedule")
{
    auto net = network::make_corridor(2, 500.0);
    auto zones = demand::build_zones(net, 1, 2);
    demand::ODMatrix od(2, {8, 9});
    od.at(0, 1, 0) = 3.0;
    od.at(1, 0, 1) = 2.5;
    od.at(0, 0, 0) = 7.0; // intra-zonal, never routed
    ScenarioSettings settings;
    settings.seed = 11;
    const auto s = assemble_scenario(net, od, zones, settings);
    std::vector<int> first_hour;
    int second_hour = 0;
    for (const auto& t: s.trips)
    {
        if (t.depart_s < 3600)
        {
            CHECK(t.origin_zone == 0);
            first_hour.push_back(t.depart_s);
        }
        else
        {
            CHECK(t.origin_zone == 1);
            ++second_hour;
            CHECK(t.depart_s < 7200);
        }
    }
    CHECK(first_hour == std::vector<int> {0, 1200, 2400});
    CHECK((second_hour == 2 || second_hour == 3));
    CHECK(s.horizon_s == 7200);
    CHECK(s.hour_label(3700) == 9);
    CHECK(s.hour_label(7300) == 10);

    const auto again = assemble_scenario(net, od, zones, settings);
    REQUIRE(again.trips.size() == s.trips.size());
    for (std::size_t i = 0; i < s.trips.size(); ++i)
        CHECK(again.trips[i].depart_s == s.trips[i].depart_s);

    // The fractional vehicle appears at the expected frequency over seeds.
    int extra = 0;
    for (std::uint64_t seed = 0; seed < 400; ++seed)
    {
        settings.seed = seed;
        const auto r = assemble_scenario(net, od, zones, settings);
        extra += static_cast<int>(r.trips.size()) - 3 - 2;
    }
    CHECK(extra > 150);
    CHECK(extra < 250);
}

TEST_CASE("unreachable zone pairs are reported")
{
    network::RoadNetwork net;
    net.add_node({1, 0.0, 0.0, network::Control::none});
    net.add_node({2, 0.001, 0.0, network::Control::none});
    net.add_node({3, 0.02, 0.0, network::Control::none});
    net.add_node({4, 0.021, 0.0, network::Control::none});
    net.add_link({1, 1, 2, 100, 1, 10, {network::Mode::drive}});
    net.add_link({2, 3, 4, 100, 1, 10, {network::Mode::drive}});
    auto zones = demand::build_zones(net, 1, 2);
    demand::ODMatrix od(2, {8});
    od.at(0, 1, 0) = 5.0;
    try
    {
        assemble_scenario(net, od, zones, {});
        FAIL("expected UnreachablePair");
    }
    catch (const Error& e)
    {
        CHECK(e.code() == Errc::UnreachablePair);
        CHECK(e.details() == std::vector<std::string> {"0", "1"});
    }
}

TEST_CASE("shortest paths agree with exhaustive search")
{
    // Two equal-time routes around a square: the smaller first link id wins.
    network::RoadNetwork sq;
    for (int i = 1; i <= 4; ++i)
        sq.add_node({i, 0.001 * i, 0.0, network::Control::none});
    sq.add_link({5, 1, 2, 100, 1, 10, {network::Mode::drive}});
    sq.add_link({3, 1, 3, 100, 1, 10, {network::Mode::drive}});
    sq.add_link({7, 2, 4, 100, 1, 10, {network::Mode::drive}});
    sq.add_link({9, 3, 4, 100, 1, 10, {network::Mode::drive}});
    sq.add_link({1, 1, 4, 150, 1, 10, {network::Mode::bike}});
    CHECK(*shortest_path(sq, 1, 4) == std::vector<std::int64_t> {3, 9});
    CHECK_FALSE(shortest_path(sq, 4, 1).has_value());
    CHECK(shortest_path(sq, 2, 2)->empty());

    for (std::uint64_t seed = 0; seed < 25; ++seed)
    {
        const auto net = network::make_random_network(seed, 2, 3);
        std::vector<std::int64_t> ids;
        for (const auto& [id, n]: net.nodes())
            ids.push_back(id);
        for (std::size_t i = 0; i < ids.size(); i += 2)
            for (std::size_t j = 1; j < ids.size(); j += 3)
            {
                if (i == j)
                    continue;
                CHECK(shortest_path(net, ids[i], ids[j]) == brute_force_path(net, ids[i], ids[j]));
            }
    }
}

TEST_CASE("conservation, bounds and reward identity on random networks")
{
    std::mt19937_64 rng(2024);
    for (int run_i = 0; run_i < 1000; ++run_i)
    {
        const auto net = network::make_random_network(rng(), 3, 3);
        auto zones = demand::build_zones(net, 2, 2);
        std::uniform_real_distribution<double> vol(50.0, 900.0), beta(0.0, 2.0);
        auto od = demand::generate_demand(zones, vol(rng), beta(rng), {8});
        ScenarioSettings settings;
        settings.seed = rng();
        settings.horizon_s = 600;
        const auto s = assemble_scenario(net, od, zones, settings);
        auto c = cycle(20);
        Simulator sim(s, c);
        while (!sim.done())
        {
            sim.step();
            REQUIRE(sim.departed() == sim.arrived() + sim.in_network());
        }
        const auto m = sim.metrics();
        const auto& r = sim.result();
        CHECK(m.throughput <= r.departed);
        CHECK(m.avg_queue >= 0.0);
        CHECK(m.total_reward <= 0.0);
        double sum = 0.0;
        for (const auto& d: r.decisions)
            sum += d.total_queue;
        CHECK(m.total_reward == -sum);
        CHECK(static_cast<int>(r.decisions.size()) == 600 / s.decision_interval_s);
        if (m.throughput > 0)
        {
            int min_ff = 1 << 30;
            for (const auto& v: r.vehicles)
                if (v.arrive_s >= 0)
                    min_ff = std::min(min_ff, v.free_flow_s);
            CHECK(m.att_s >= min_ff);
            CHECK(m.avg_delay_s >= 0.0);
        }
    }
}

TEST_CASE("runs are deterministic")
{
    const auto s = make_grid_scenario(2, 2, 600.0, 1.0, 1, 9);
    auto a = cycle(25);
    auto b = cycle(25);
    const auto ra = run(s, a);
    const auto rb = run(s, b);
    CHECK(ra.second == rb.second);
    CHECK(ra.first.discharge_log == rb.first.discharge_log);
}

TEST_CASE("doubling demand never shortens queues")
{
    for (std::uint64_t seed = 0; seed < 12; ++seed)
    {
        const auto net = network::make_random_network(seed, 2, 2);
        auto zones = demand::build_zones(net, 2, 2);
        auto od = demand::generate_demand(zones, 300.0, 1.0, {8});
        for (auto& v: od.data())
            v = std::round(v);
        auto doubled = od;
        for (auto& v: doubled.data())
            v *= 2;
        ScenarioSettings settings;
        settings.seed = seed;
        const auto base = assemble_scenario(net, od, zones, settings);
        const auto heavy = assemble_scenario(net, doubled, zones, settings);
        auto c1 = cycle(30);
        auto c2 = cycle(30);
        const auto m1 = run(base, c1).second;
        const auto m2 = run(heavy, c2).second;
        CHECK(m2.avg_queue >= m1.avg_queue);
    }
}

TEST_CASE("invalid controller actions abort the run")
{
    auto s = make_single_intersection_scenario(100, 100);
    auto bad = keep(7);
    try
    {
        run(s, bad);
        FAIL("expected ControllerError");
    }
    catch (const Error& e)
    {
        CHECK(e.code() == Errc::ControllerError);
        CHECK(std::string(e.what()).find("phase 7") != std::string::npos);
    }
}

TEST_CASE("observation counters")
{
    const auto s = make_corridor_scenario(30.0, 20.0, 2, 3);
    auto c = keep(0);
    const auto [res, m] = run(s, c);
    REQUIRE(m.per_link_counts.size() == 2);
    // Oracle: eastbound trips enter link 3 on departure, westbound trips
    // enter link 4 when discharged at the middle node.
    std::map<std::int64_t, std::map<int, int>> expect {{3, {{7, 0}, {8, 0}}}, {4, {{7, 0}, {8, 0}}}};
    for (std::size_t v = 0; v < res.vehicles.size(); ++v)
    {
        const auto& links = s.routes[s.trips[res.vehicles[v].trip].route].links;
        if (links.front() == 3)
            ++expect[3][s.hour_label(res.vehicles[v].depart_s)];
        else
        {
            CHECK(links.back() == 4);
            for (auto [t, who]: res.discharge_log)
                if (who == static_cast<int>(v))
                    ++expect[4][s.hour_label(t)];
        }
    }
    CHECK(m.per_link_counts == expect);
    CHECK(m.per_link_counts.at(3).at(7) == 30);
    CHECK(m.per_link_counts.at(4).at(8) == 20);
}

TEST_CASE("metrics json and scenario directory")
{
    TempDir dir;
    const auto s = make_corridor_scenario(10, 10);
    auto c = keep(0);
    const auto m = run(s, c).second;
    write_metrics_json(m, dir / "metrics.json");
    CHECK(read_metrics_json(dir / "metrics.json") == m);

    auto j = m.to_json();
    j.erase("throughput");
    try
    {
        MetricsReport::from_json(j);
        FAIL("expected SchemaError");
    }
    catch (const Error& e)
    {
        CHECK(e.code() == Errc::SchemaError);
        CHECK(e.details() == std::vector<std::string> {"throughput"});
        CHECK(std::string(e.what()).find("throughput") != std::string::npos);
    }

    write_scenario_dir(s, dir / "scn");
    for (const char* f: {"node.csv", "link.csv", "demand.csv", "settings.json"})
        CHECK(std::filesystem::exists(dir / "scn" / f));
}

TEST_CASE("external simulator adapter contract")
{
    TempDir dir;
    const auto s = make_corridor_scenario(10, 10);
    MetricsReport fixed;
    fixed.att_s = 87.5;
    fixed.throughput = 19;
    fixed.avg_queue = 0.25;
    fixed.avg_delay_s = 4.0;
    fixed.total_reward = -31;
    fixed.per_link_counts[3][7] = 10;
    write_metrics_json(fixed, dir / "fixture.json");

    const auto script = dir / "adapter.sh";
    write_file(script.string(), "#!/bin/sh\n"
                                "test -f \"$2/link.csv\" || exit 3\n"
                                "cp \"$1\" \"$3/metrics.json\"\n");
    std::filesystem::permissions(script, std::filesystem::perms::owner_all);

    AdapterConfig cfg {script.string(), {(dir / "fixture.json").string()}, dir / "work"};
    const auto r = run_external(s, cfg);
    CHECK(r.metrics == fixed);

    write_file(script.string(), "#!/bin/sh\necho adapter exploded\nexit 1\n");
    try
    {
        run_external(s, cfg);
        FAIL("expected BackendError");
    }
    catch (const Error& e)
    {
        CHECK(e.code() == Errc::BackendError);
        CHECK(std::string(e.what()).find("adapter exploded") != std::string::npos);
    }

    auto broken = fixed.to_json();
    broken.erase("throughput");
    write_file((dir / "fixture.json").string(), broken.dump());
    write_file(script.string(), "#!/bin/sh\ncp \"$1\" \"$3/metrics.json\"\n");
    try
    {
        run_external(s, cfg);
        FAIL("expected SchemaError");
    }
    catch (const Error& e)
    {
        CHECK(e.code() == Errc::SchemaError);
        CHECK(std::string(e.what()).find("throughput") != std::string::npos);
    }

    CHECK_THROWS_AS(run_external(s, AdapterConfig {"", {}, dir / "w2"}), Error);
}
