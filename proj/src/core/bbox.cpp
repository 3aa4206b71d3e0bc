// SPDX-License-Identifier: Apache-2.0
#include <openti/core/bbox.hpp>
#include <openti/core/error.hpp>
#include <openti/core/text.hpp>

#include <cmath>

namespace openti
{

BBox BBox::from_array(const std::array<double, 4>& v)
{
    BBox box {v[0], v[1], v[2], v[3]};
    box.validate();
    return box;
}

bool BBox::valid() const noexcept
{
    for (double x: {min_lon, min_lat, max_lon, max_lat})
        if (!std::isfinite(x))
            return false;
    return -180.0 <= min_lon && min_lon < max_lon && max_lon <= 180.0 && -90.0 <= min_lat && min_lat < max_lat
           && max_lat <= 90.0;
}

void BBox::validate() const
{
    if (!valid())
        fail(Errc::InvalidArgument,
             "bbox must satisfy -180 <= min_lon < max_lon <= 180 and -90 <= min_lat < max_lat <= 90, got ["
                 + to_csv() + "]");
}

bool BBox::contains(const BBox& inner, double tol) const noexcept
{
    return min_lon <= inner.min_lon + tol && min_lat <= inner.min_lat + tol && max_lon >= inner.max_lon - tol
           && max_lat >= inner.max_lat - tol;
}

bool BBox::contains_point(double lon, double lat) const noexcept
{
    return lon >= min_lon && lon <= max_lon && lat >= min_lat && lat <= max_lat;
}

std::string BBox::to_csv() const
{
    return format_coord(min_lon) + "," + format_coord(min_lat) + "," + format_coord(max_lon) + ","
           + format_coord(max_lat);
}

} // namespace openti
