// SPDX-License-Identifier: Apache-2.0
#include <openti/core/geodesy.hpp>

#include <cmath>
#include <numbers>

namespace openti
{

namespace
{
constexpr double radians(double deg) noexcept { return deg * std::numbers::pi / 180.0; }
} // namespace

double haversine_m(LonLat a, LonLat b) noexcept
{
    const double phi1 = radians(a.lat);
    const double phi2 = radians(b.lat);
    const double dphi = phi2 - phi1;
    const double dlambda = radians(b.lon - a.lon);
    const double s = std::sin(dphi / 2.0) * std::sin(dphi / 2.0)
                     + std::cos(phi1) * std::cos(phi2) * std::sin(dlambda / 2.0) * std::sin(dlambda / 2.0);
    return 2.0 * kEarthRadiusMeters * std::asin(std::min(1.0, std::sqrt(s)));
}

double bearing_deg(LonLat a, LonLat b) noexcept
{
    const double phi1 = radians(a.lat);
    const double phi2 = radians(b.lat);
    const double dlambda = radians(b.lon - a.lon);
    const double y = std::sin(dlambda) * std::cos(phi2);
    const double x = std::cos(phi1) * std::sin(phi2) - std::sin(phi1) * std::cos(phi2) * std::cos(dlambda);
    double deg = std::atan2(y, x) * 180.0 / std::numbers::pi;
    if (deg < 0.0)
        deg += 360.0;
    if (deg >= 360.0)
        deg -= 360.0;
    return deg;
}

} // namespace openti
