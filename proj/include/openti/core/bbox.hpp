// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <string>

namespace openti
{

/// Axis-aligned lon/lat box in degrees, ordered the way tools exchange it:
/// [min_lon, min_lat, max_lon, max_lat].
struct BBox
{
    double min_lon = 0.0;
    double min_lat = 0.0;
    double max_lon = 0.0;
    double max_lat = 0.0;

    /// Throws InvalidArgument when the ordering or range invariants fail.
    static BBox from_array(const std::array<double, 4>& v);

    [[nodiscard]] bool valid() const noexcept;
    void validate() const;

    [[nodiscard]] double area_deg2() const noexcept { return (max_lon - min_lon) * (max_lat - min_lat); }
    [[nodiscard]] bool contains(const BBox& inner, double tol = 0.0) const noexcept;
    [[nodiscard]] bool contains_point(double lon, double lat) const noexcept;
    [[nodiscard]] std::array<double, 4> to_array() const noexcept { return {min_lon, min_lat, max_lon, max_lat}; }

    /// "min_lon,min_lat,max_lon,max_lat" with trailing zeros trimmed.
    [[nodiscard]] std::string to_csv() const;

    friend bool operator==(const BBox&, const BBox&) = default;
};

} // namespace openti
