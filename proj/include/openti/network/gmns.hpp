// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <openti/network/network.hpp>

#include <filesystem>
#include <utility>

namespace openti::network
{

struct GmnsPaths
{
    std::filesystem::path node_csv;
    std::filesystem::path link_csv;
};

/// Writes node.csv and link.csv into `out_dir` (created if needed).
/// Throws InvalidArgument on an empty network, IoError on write failure.
GmnsPaths to_gmns(const RoadNetwork& network, const std::filesystem::path& out_dir);

/// Reads node.csv/link.csv from `dir` and rebuilds signal plans.
/// Throws IoError, SchemaError (bad header or row).
RoadNetwork read_gmns(const std::filesystem::path& dir);

struct FilterResult
{
    RoadNetwork network;
    std::filesystem::path dir; // <out_dir>/gmns_<mode>
};

/// Links carrying `mode` plus their endpoints, persisted as GMNS.
/// Throws EmptyResult when no link carries the mode.
FilterResult filter_network(const RoadNetwork& network, Mode mode, const std::filesystem::path& out_dir);

} // namespace openti::network
