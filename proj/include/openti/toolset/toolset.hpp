// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <openti/agent/registry.hpp>
#include <openti/demand/demand.hpp>
#include <openti/network/network.hpp>
#include <openti/sim/scenario.hpp>

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace openti::toolset
{

/// The twelve catalog tools, in catalog order.
const std::vector<std::string>& catalog_tool_names();

/// Tools registered beside the catalog (battery-only helpers).
const std::vector<std::string>& auxiliary_tool_names();

bool is_auxiliary(std::string_view name);

std::vector<agent::ToolDescriptor> descriptors();

/// Registry with every catalog tool followed by the auxiliary ones.
std::shared_ptr<agent::ToolRegistry> make_registry();

/// Accepts an .osm file, a GMNS directory or one of its node.csv/link.csv.
/// Throws IoError when the path does not exist.
network::RoadNetwork load_network(const std::filesystem::path& path);

struct ZoneShape
{
    int rows = 1;
    int cols = 1;
};

/// `zones.json` beside a demand file, else a square grid when the zone count
/// is a perfect square, else a single row.
ZoneShape zone_shape_for(const std::filesystem::path& demand_csv, int zones);

struct ScenarioInputs
{
    std::optional<std::filesystem::path> network;
    std::optional<std::filesystem::path> demand;
    double total_vph = 600.0; // gravity demand when no demand file is given
    std::uint64_t seed = 0;
};

/// Network plus demand file, or gravity demand on a 3x3 zone grid; with no
/// network the asymmetric single-intersection case.
sim::Scenario build_scenario(const ScenarioInputs& in);

} // namespace openti::toolset
