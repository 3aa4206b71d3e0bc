// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <openti/demand/demand.hpp>
#include <openti/network/network.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace openti::sim
{

struct ScenarioSettings
{
    int horizon_s = 0; // 0: one hour per OD hour
    int decision_interval_s = 10;
    double saturation_rate = 0.5; // veh/s/lane
    std::uint64_t seed = 0;
    std::vector<std::int64_t> observed_links; // empty: report every used link
};

struct Route
{
    std::int64_t from_node = 0;
    std::int64_t to_node = 0;
    std::vector<std::int64_t> links;
    int free_flow_s = 0;
};

struct Trip
{
    int depart_s = 0;
    int route = 0;
    int origin_zone = -1;
    int dest_zone = -1;
};

struct Scenario
{
    network::RoadNetwork network;
    demand::ODMatrix od;
    demand::ZoneGrid zones;
    int horizon_s = 3600;
    int decision_interval_s = 10;
    double saturation_rate = 0.5;
    std::uint64_t seed = 0;
    std::vector<std::int64_t> observed_links;

    std::vector<std::int64_t> zone_nodes; // nearest drive node per zone
    std::vector<Route> routes;
    std::vector<Trip> trips; // sorted by departure

    /// Label of the hour containing second `t` (OD hours are consecutive
    /// 3600-s slots from t = 0, continuing past the last label).
    [[nodiscard]] int hour_label(int t) const noexcept;

    /// Throws InvalidArgument.
    void validate() const;
};

/// Link traversal time in whole seconds.
int free_flow_time_s(const network::Link& link) noexcept;

/// Fastest drive path by integer free-flow time; ties go to the
/// lexicographically smallest link-id sequence. nullopt if unreachable.
std::optional<std::vector<std::int64_t>> shortest_path(const network::RoadNetwork& network, std::int64_t from,
                                                       std::int64_t to);

/// Routes every nonzero off-diagonal OD cell between the zones' nearest
/// drive nodes and draws the departure schedule from `settings.seed`.
/// Throws UnreachablePair (details: origin zone, destination zone).
Scenario assemble_scenario(network::RoadNetwork network, demand::ODMatrix od, demand::ZoneGrid zones,
                           const ScenarioSettings& settings);

/// Replaces the OD matrix in place and redraws the departure schedule with
/// the scenario seed, routing only pairs not seen before. Throws
/// UnreachablePair.
void set_demand(Scenario& scenario, demand::ODMatrix od);

struct ManualTrip
{
    int depart_s = 0;
    std::vector<std::int64_t> links;
};

/// Scenario with explicit vehicle paths and no OD.
Scenario make_trip_scenario(network::RoadNetwork network, const std::vector<ManualTrip>& trips,
                            const ScenarioSettings& settings);

/// GMNS files, demand.csv and settings.json.
void write_scenario_dir(const Scenario& scenario, const std::filesystem::path& dir);

} // namespace openti::sim
