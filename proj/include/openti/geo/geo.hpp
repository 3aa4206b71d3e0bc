// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <openti/core/bbox.hpp>
#include <openti/network/network.hpp>

#include <chrono>
#include <filesystem>
#include <string>

namespace openti::geo
{

/// Where place names and map extracts come from. Offline mode reads
/// `<data_dir>/geocoder.json` and `<data_dir>/osm/*.osm`.
struct GeoConfig
{
    bool offline = true;
    std::filesystem::path data_dir;
    std::string geocoder_url = "https://nominatim.openstreetmap.org/search";
    std::string osm_api_url = "https://api.openstreetmap.org/api/0.6/map";
    std::string user_agent = "openti/0.1";
    std::chrono::milliseconds timeout {15000};

    /// OPENTI_OFFLINE, OPENTI_DATA_DIR, OPENTI_GEOCODER_URL, OPENTI_OSM_API_URL.
    static GeoConfig from_env();
};

inline constexpr double kMaxDownloadAreaDeg2 = 0.25;

/// First geocoder hit as [min_lon, min_lat, max_lon, max_lat].
/// Throws InvalidArgument (blank place), NotFound, ServiceError.
BBox query_area_range(const std::string& place, const GeoConfig& config);

/// `map_<min_lon>_<min_lat>_<max_lon>_<max_lat>.osm`
std::string osm_file_name(const BBox& bbox);

/// Downloads (or, offline, copies the first bundled extract whose bounds
/// contain the request) into `out_dir`. Returns the written file.
/// Throws InvalidArgument, AreaTooLarge, ServiceError, NoFixture.
std::filesystem::path download_osm(const BBox& bbox, const std::filesystem::path& out_dir, const GeoConfig& config);

struct MapArtifact
{
    std::filesystem::path svg_path;
    std::string share_link;
    BBox bbox;
};

/// `https://www.openstreetmap.org/?bbox=<min_lon>,<min_lat>,<max_lon>,<max_lat>`
std::string share_link(const BBox& bbox);

inline constexpr int kMapWidthPx = 1000;

/// Area outline map, written as `<out_dir>/map_area.svg`.
MapArtifact show_on_map(const BBox& bbox, const std::filesystem::path& out_dir);
/// Network map: links as polylines coloured by mode, nodes as dots, written
/// as `<out_dir>/map_network.svg`. Throws EmptyNetwork.
MapArtifact show_on_map(const network::RoadNetwork& network, const std::filesystem::path& out_dir);

std::string render_area_svg(const BBox& bbox);
std::string render_network_svg(const network::RoadNetwork& network);

} // namespace openti::geo
