// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace openti
{

inline constexpr double kEarthRadiusMeters = 6371008.8;

struct LonLat
{
    double lon = 0.0;
    double lat = 0.0;

    friend bool operator==(const LonLat&, const LonLat&) = default;
};

/// Great-circle distance in meters.
double haversine_m(LonLat a, LonLat b) noexcept;

/// Initial bearing from `a` to `b` in degrees, clockwise from north, in [0, 360).
double bearing_deg(LonLat a, LonLat b) noexcept;

} // namespace openti
