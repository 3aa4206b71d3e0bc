// SPDX-License-Identifier: Apache-2.0
#include <openti/core/error.hpp>
#include <openti/network/synthetic.hpp>
#include <openti/sim/synthetic.hpp>

#include <numeric>

namespace openti::sim
{

namespace
{

std::vector<int> hour_range(int start, int count)
{
    require(count >= 1 && start + count <= 24, "hour range outside the day");
    std::vector<int> h(static_cast<std::size_t>(count));
    std::iota(h.begin(), h.end(), start);
    return h;
}

} // namespace

Scenario make_single_intersection_scenario(double ns_vph, double ew_vph, int hours, std::uint64_t seed,
                                           int decision_interval_s)
{
    network::GridSpec spec;
    auto net = network::make_grid_network(spec);
    auto zones = demand::build_zones(net, 3, 3);
    demand::ODMatrix od(9, hour_range(8, hours));
    constexpr int south = 1, west = 3, east = 5, north = 7;
    for (std::size_t h = 0; h < od.hour_count(); ++h)
    {
        od.at(north, south, h) = ns_vph;
        od.at(south, north, h) = ns_vph;
        od.at(west, east, h) = ew_vph;
        od.at(east, west, h) = ew_vph;
    }
    ScenarioSettings s;
    s.seed = seed;
    s.decision_interval_s = decision_interval_s;
    return assemble_scenario(std::move(net), std::move(od), std::move(zones), s);
}

Scenario make_asymmetric_scenario(std::uint64_t seed, int decision_interval_s)
{
    return make_single_intersection_scenario(kAsymmetricNsVph, kAsymmetricEwVph, 1, seed, decision_interval_s);
}

Scenario make_grid_scenario(int rows, int cols, double total_vph, double beta, int hours, std::uint64_t seed,
                            int decision_interval_s)
{
    network::GridSpec spec;
    spec.rows = rows;
    spec.cols = cols;
    auto net = network::make_grid_network(spec);
    auto zones = demand::build_zones(net, rows + 2, cols + 2);
    auto od = demand::generate_demand(zones, total_vph, beta, hour_range(8, hours));
    ScenarioSettings s;
    s.seed = seed;
    s.decision_interval_s = decision_interval_s;
    return assemble_scenario(std::move(net), std::move(od), std::move(zones), s);
}

Scenario make_corridor_scenario(double w2e_vph, double e2w_vph, int hours, std::uint64_t seed)
{
    auto net = network::make_corridor(4, 400.0);
    auto zones = demand::build_zones(net, 1, 2);
    demand::ODMatrix od(2, hour_range(7, hours));
    for (std::size_t h = 0; h < od.hour_count(); ++h)
    {
        od.at(0, 1, h) = w2e_vph;
        od.at(1, 0, h) = e2w_vph;
    }
    ScenarioSettings s;
    s.seed = seed;
    // Links are created forward then reverse per segment: 2->3 is link 3 and 3->2 is link 4.
    s.observed_links = {3, 4};
    return assemble_scenario(std::move(net), std::move(od), std::move(zones), s);
}

} // namespace openti::sim
