// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <openti/network/network.hpp>

#include <cstdint>

namespace openti::network
{

struct GridSpec
{
    int rows = 1;
    int cols = 1;
    double spacing_m = 400.0; // between neighbouring intersections
    double arm_m = 300.0;     // boundary arms out to the terminal nodes
    int lanes = 1;
    double free_speed = 11.1;
    bool signalized = true;
    LonLat origin {-111.94, 33.42}; // south-west intersection
};

/// rows x cols intersections joined by two-way links, with one two-way arm
/// per open side of each boundary intersection ending in a terminal node.
/// Intersection ids are 1 + r*cols + c; terminal ids start at 1001.
RoadNetwork make_grid_network(const GridSpec& spec);

/// A straight west-east two-way road of `segments` links of `segment_m`.
/// Node ids 1..segments+1 from west to east, unsignalized.
RoadNetwork make_corridor(int segments, double segment_m, double free_speed = 11.1, int lanes = 1,
                          LonLat origin = {-111.94, 33.42});

/// Random connected grid-like network of at most rows*cols signalized
/// intersections (some links dropped at random while keeping the undirected
/// spanning structure), used by property tests.
RoadNetwork make_random_network(std::uint64_t seed, int max_rows = 3, int max_cols = 3);

} // namespace openti::network
