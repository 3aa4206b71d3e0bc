// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <openti/core/bbox.hpp>
#include <openti/network/network.hpp>

#include <optional>
#include <string>

namespace openti::network
{

struct OsmParseStats
{
    int ways_seen = 0;
    int ways_used = 0;
    int dangling_refs = 0;    // <nd ref> to nodes missing from the file, dropped
    int degenerate_segments = 0; // zero-length pieces skipped
};

/// Reads an OSM XML extract into a directed road network. Ways are split at
/// their endpoints, at nodes shared with other eligible ways and at signal
/// nodes. Link ids are assigned 1, 2, ... in document order.
/// Throws MalformedXml (bad XML or a root other than <osm>), EmptyNetwork.
RoadNetwork parse_osm(const std::string& path, OsmParseStats* stats = nullptr);
RoadNetwork parse_osm_string(const std::string& xml, OsmParseStats* stats = nullptr);

/// The <bounds> element of an extract, if present.
std::optional<BBox> osm_bounds(const std::string& path);

} // namespace openti::network
