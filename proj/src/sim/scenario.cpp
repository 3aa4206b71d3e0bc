// SPDX-License-Identifier: Apache-2.0
#include <openti/core/error.hpp>
#include <openti/core/text.hpp>
#include <openti/network/gmns.hpp>
#include <openti/sim/scenario.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <random>

namespace openti::sim
{

int Scenario::hour_label(int t) const noexcept
{
    const int idx = t / 3600;
    const auto& hours = od.hours();
    if (hours.empty())
        return idx;
    if (idx < static_cast<int>(hours.size()))
        return hours[idx];
    return hours.back() + idx - static_cast<int>(hours.size()) + 1;
}

void Scenario::validate() const
{
    require(horizon_s > 0, "horizon must be positive");
    require(decision_interval_s > 0, "decision interval must be positive");
    require(horizon_s % decision_interval_s == 0, "decision interval must divide the horizon");
    require(saturation_rate > 0.0 && std::isfinite(saturation_rate), "saturation rate must be positive");
    for (auto id: observed_links)
        require(network.find_link(id) != nullptr, "observed link " + std::to_string(id) + " not in network");
    for (const auto& t: trips)
        require(t.route >= 0 && t.route < static_cast<int>(routes.size()) && t.depart_s >= 0, "trip references bad route");
}

int free_flow_time_s(const network::Link& link) noexcept
{
    return std::max(1, static_cast<int>(std::ceil(link.length_m / link.free_speed - 1e-9)));
}

std::optional<std::vector<std::int64_t>> shortest_path(const network::RoadNetwork& net, std::int64_t from,
                                                       std::int64_t to)
{
    if (from == to)
        return std::vector<std::int64_t> {};
    // Distances to `to` over reversed drive links, then a greedy forward walk
    // that always takes the smallest link id still on a shortest path.
    constexpr long kInf = std::numeric_limits<long>::max();
    std::map<std::int64_t, long> dist;
    using Item = std::pair<long, std::int64_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[to] = 0;
    pq.push({0, to});
    while (!pq.empty())
    {
        auto [d, n] = pq.top();
        pq.pop();
        if (d != dist[n])
            continue;
        for (auto lid: net.in_links(n))
        {
            const auto& l = net.link(lid);
            if (!l.modes.contains(network::Mode::drive))
                continue;
            const long nd = d + free_flow_time_s(l);
            auto it = dist.find(l.from);
            if (it == dist.end() || nd < it->second)
            {
                dist[l.from] = nd;
                pq.push({nd, l.from});
            }
        }
    }
    if (!dist.count(from))
        return std::nullopt;
    std::vector<std::int64_t> path;
    std::int64_t at = from;
    while (at != to)
    {
        long best = kInf;
        std::int64_t pick = 0;
        for (auto lid: net.out_links(at)) // sorted by id
        {
            const auto& l = net.link(lid);
            if (!l.modes.contains(network::Mode::drive))
                continue;
            auto it = dist.find(l.to);
            if (it != dist.end() && it->second + free_flow_time_s(l) == dist.at(at))
            {
                best = it->second;
                pick = lid;
                break;
            }
        }
        if (best == kInf)
            return std::nullopt;
        path.push_back(pick);
        at = net.link(pick).to;
    }
    return path;
}

namespace
{

int route_free_flow(const network::RoadNetwork& net, const std::vector<std::int64_t>& links)
{
    int s = 0;
    for (auto id: links)
        s += free_flow_time_s(net.link(id));
    return s;
}

std::int64_t nearest_drive_node(const network::RoadNetwork& net, LonLat p)
{
    std::int64_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& [id, n]: net.nodes())
    {
        bool drive = false;
        for (auto lid: net.out_links(id))
            drive = drive || net.link(lid).modes.contains(network::Mode::drive);
        for (auto lid: net.in_links(id))
            drive = drive || net.link(lid).modes.contains(network::Mode::drive);
        if (!drive)
            continue;
        const double d = haversine_m(p, n.pos());
        if (d < best_d)
        {
            best_d = d;
            best = id;
        }
    }
    return best;
}

void apply_settings(Scenario& s, const ScenarioSettings& settings, int default_horizon)
{
    s.horizon_s = settings.horizon_s > 0 ? settings.horizon_s : default_horizon;
    s.decision_interval_s = settings.decision_interval_s;
    s.saturation_rate = settings.saturation_rate;
    s.seed = settings.seed;
    s.observed_links = settings.observed_links;
}

void schedule(Scenario& s)
{
    std::map<std::pair<std::int64_t, std::int64_t>, int> by_nodes;
    for (std::size_t i = 0; i < s.routes.size(); ++i)
        by_nodes[{s.routes[i].from_node, s.routes[i].to_node}] = static_cast<int>(i);
    const int n = s.od.zones();
    std::map<std::pair<int, int>, int> route_of;
    for (int o = 0; o < n; ++o)
        for (int d = 0; d < n; ++d)
        {
            if (o == d)
                continue;
            bool used = false;
            for (std::size_t h = 0; h < s.od.hour_count(); ++h)
                used = used || s.od.at(o, d, h) > 0.0;
            if (!used)
                continue;
            const auto from = s.zone_nodes[o], to = s.zone_nodes[d];
            if (from != 0 && from == to)
                continue; // both zones snap to the same node
            auto known = by_nodes.find({from, to});
            if (known != by_nodes.end())
            {
                route_of[{o, d}] = known->second;
                continue;
            }
            std::optional<std::vector<std::int64_t>> path;
            if (from != 0 && to != 0)
                path = shortest_path(s.network, from, to);
            if (!path)
                fail(Errc::UnreachablePair,
                     "no drive path from zone " + std::to_string(o) + " to zone " + std::to_string(d),
                     {std::to_string(o), std::to_string(d)});
            route_of[{o, d}] = by_nodes[{from, to}] = static_cast<int>(s.routes.size());
            s.routes.push_back({from, to, *path, route_free_flow(s.network, *path)});
        }

    s.trips.clear();
    std::mt19937_64 rng(s.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> second(0, 3599);
    for (std::size_t h = 0; h < s.od.hour_count(); ++h)
    {
        const int start = static_cast<int>(h) * 3600;
        for (int o = 0; o < n; ++o)
            for (int d = 0; d < n; ++d)
            {
                auto it = route_of.find({o, d});
                if (it == route_of.end())
                    continue;
                const double v = s.od.at(o, d, h);
                const int whole = static_cast<int>(std::floor(v));
                for (int k = 0; k < whole; ++k)
                    s.trips.push_back({start + static_cast<int>(static_cast<long>(k) * 3600 / whole), it->second, o, d});
                if (unit(rng) < v - whole)
                    s.trips.push_back({start + second(rng), it->second, o, d});
            }
    }
    std::stable_sort(s.trips.begin(), s.trips.end(),
                     [](const Trip& a, const Trip& b) { return a.depart_s < b.depart_s; });
}

} // namespace

Scenario assemble_scenario(network::RoadNetwork network, demand::ODMatrix od, demand::ZoneGrid zones,
                           const ScenarioSettings& settings)
{
    network.validate();
    od.validate();
    require(od.zones() == static_cast<int>(zones.zones.size()), "OD zone count differs from the zone grid");
    Scenario s;
    s.network = std::move(network);
    s.od = std::move(od);
    s.zones = std::move(zones);
    apply_settings(s, settings, static_cast<int>(s.od.hour_count()) * 3600);
    s.validate();

    for (const auto& z: s.zones.zones)
        s.zone_nodes.push_back(nearest_drive_node(s.network, z.centroid));
    schedule(s);
    return s;
}

void set_demand(Scenario& s, demand::ODMatrix od)
{
    od.validate();
    require(od.zones() == static_cast<int>(s.zone_nodes.size()), "OD zone count differs from the scenario zones");
    s.od = std::move(od);
    schedule(s);
}

Scenario make_trip_scenario(network::RoadNetwork network, const std::vector<ManualTrip>& trips,
                            const ScenarioSettings& settings)
{
    network.validate();
    Scenario s;
    s.network = std::move(network);
    int last = 0;
    for (const auto& t: trips)
        last = std::max(last, t.depart_s);
    apply_settings(s, settings, (last / 3600 + 1) * 3600);
    s.validate();
    for (const auto& t: trips)
    {
        require(!t.links.empty(), "manual trip needs at least one link");
        for (std::size_t i = 0; i < t.links.size(); ++i)
        {
            const auto& l = s.network.link(t.links[i]);
            if (i > 0)
                require(s.network.link(t.links[i - 1]).to == l.from, "manual trip links are not contiguous");
        }
        s.trips.push_back({t.depart_s, static_cast<int>(s.routes.size()), -1, -1});
        s.routes.push_back({s.network.link(t.links.front()).from, s.network.link(t.links.back()).to, t.links,
                            route_free_flow(s.network, t.links)});
    }
    std::stable_sort(s.trips.begin(), s.trips.end(),
                     [](const Trip& a, const Trip& b) { return a.depart_s < b.depart_s; });
    return s;
}

void write_scenario_dir(const Scenario& s, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    network::to_gmns(s.network, dir);
    if (s.od.zones() > 0)
        demand::write_demand_csv(s.od, dir / "demand.csv");
    nlohmann::json j;
    j["horizon_s"] = s.horizon_s;
    j["decision_interval_s"] = s.decision_interval_s;
    j["saturation_rate"] = s.saturation_rate;
    j["seed"] = s.seed;
    j["observed_links"] = s.observed_links;
    j["zone_nodes"] = s.zone_nodes;
    j["zones"] = {{"rows", s.zones.rows},
                  {"cols", s.zones.cols},
                  {"bbox", {s.zones.bbox.min_lon, s.zones.bbox.min_lat, s.zones.bbox.max_lon, s.zones.bbox.max_lat}}};
    write_file((dir / "settings.json").string(), j.dump(2) + "\n");
}

} // namespace openti::sim
