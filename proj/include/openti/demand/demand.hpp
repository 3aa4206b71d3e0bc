// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <openti/core/bbox.hpp>
#include <openti/core/geodesy.hpp>
#include <openti/network/network.hpp>

#include <cstdint>
#include <filesystem>
#include <vector>

namespace openti::demand
{

struct Zone
{
    int id = 0;
    BBox cell;
    LonLat centroid;
    int node_count = 0;
    std::vector<std::int64_t> nodes;
};

/// rows x cols cells tiling `bbox`, ids row-major from the south-west corner.
struct ZoneGrid
{
    BBox bbox;
    int rows = 1;
    int cols = 1;
    std::vector<Zone> zones;

    /// Cell holding the point (left/bottom edges inclusive, outer edges
    /// clamped inward), or -1 outside the grid.
    [[nodiscard]] int zone_of(double lon, double lat) const noexcept;
    [[nodiscard]] std::size_t size() const noexcept { return zones.size(); }
};

/// Grid over the network extent. A zero-width extent is padded by 1e-4 deg.
ZoneGrid build_zones(const network::RoadNetwork& network, int rows, int cols);

/// Trips per origin zone x destination zone x hour.
class ODMatrix
{
public:
    ODMatrix() = default;
    ODMatrix(int zones, std::vector<int> hours);

    [[nodiscard]] int zones() const noexcept { return _zones; }
    [[nodiscard]] const std::vector<int>& hours() const noexcept { return _hours; }
    [[nodiscard]] std::size_t hour_count() const noexcept { return _hours.size(); }

    [[nodiscard]] double at(int o, int d, std::size_t hour_index) const;
    double& at(int o, int d, std::size_t hour_index);
    [[nodiscard]] double hour_total(std::size_t hour_index) const;
    [[nodiscard]] double max() const noexcept;

    [[nodiscard]] const std::vector<double>& data() const noexcept { return _trips; }
    std::vector<double>& data() noexcept { return _trips; }

    /// Non-negative finite entries, hours in 0..23 and unique.
    void validate() const;

    friend bool operator==(const ODMatrix&, const ODMatrix&) = default;

private:
    [[nodiscard]] std::size_t index(int o, int d, std::size_t h) const;

    int _zones = 0;
    std::vector<int> _hours;
    std::vector<double> _trips; // [o][d][h]
};

/// Gravity model T_ij = P_i A_j d_ij^-beta with P = A = node counts and
/// d_ii = half the cell diagonal, scaled so each hour sums to the total.
/// Throws InvalidArgument, AllZonesEmpty.
ODMatrix generate_demand(const ZoneGrid& zones, double total_trips_per_hour, double beta, const std::vector<int>& hours);

struct DemandArtifacts
{
    std::filesystem::path csv;
    std::vector<std::filesystem::path> heatmaps; // one per hour
};

/// demand.csv (`o_zone,d_zone,hour,volume`) and `demand_h<hour>.svg`.
DemandArtifacts visualize_demand(const ODMatrix& od, const std::filesystem::path& out_dir);
std::string render_heatmap_svg(const ODMatrix& od, std::size_t hour_index);

void write_demand_csv(const ODMatrix& od, const std::filesystem::path& path);
/// Zones and hours are inferred from the rows. Throws IoError, SchemaError.
ODMatrix read_demand_csv(const std::filesystem::path& path);

struct ObservationSeries
{
    std::int64_t link_id = 0;
    std::vector<int> hours;
    std::vector<int> counts;
};

/// `link_id,hour,count`, one series per link in first-appearance order with
/// hours sorted. Throws IoError, SchemaError.
std::vector<ObservationSeries> read_counts_csv(const std::filesystem::path& path);
void write_counts_csv(const std::vector<ObservationSeries>& series, const std::filesystem::path& path);

} // namespace openti::demand
