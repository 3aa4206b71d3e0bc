// SPDX-License-Identifier: Apache-2.0
#include <openti/core/error.hpp>
#include <openti/core/text.hpp>
#include <openti/demand/demand.hpp>
#include <openti/kernels/kernels.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace openti::demand
{

int ZoneGrid::zone_of(double lon, double lat) const noexcept
{
    if (lon < bbox.min_lon || lon > bbox.max_lon || lat < bbox.min_lat || lat > bbox.max_lat)
        return -1;
    const double w = (bbox.max_lon - bbox.min_lon) / cols;
    const double h = (bbox.max_lat - bbox.min_lat) / rows;
    const int c = std::min(cols - 1, static_cast<int>(std::floor((lon - bbox.min_lon) / w)));
    const int r = std::min(rows - 1, static_cast<int>(std::floor((lat - bbox.min_lat) / h)));
    return r * cols + c;
}

ZoneGrid build_zones(const network::RoadNetwork& network, int rows, int cols)
{
    require(!network.empty(), "cannot zone an empty network");
    require(rows >= 1 && cols >= 1, "zone grid needs at least one row and column");
    ZoneGrid g;
    g.rows = rows;
    g.cols = cols;
    g.bbox = network.extent();
    if (g.bbox.max_lon - g.bbox.min_lon <= 0.0)
    {
        g.bbox.min_lon -= 1e-4;
        g.bbox.max_lon += 1e-4;
    }
    if (g.bbox.max_lat - g.bbox.min_lat <= 0.0)
    {
        g.bbox.min_lat -= 1e-4;
        g.bbox.max_lat += 1e-4;
    }
    const double w = (g.bbox.max_lon - g.bbox.min_lon) / cols;
    const double h = (g.bbox.max_lat - g.bbox.min_lat) / rows;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
        {
            Zone z;
            z.id = r * cols + c;
            z.cell = {g.bbox.min_lon + c * w, g.bbox.min_lat + r * h,
                      c + 1 == cols ? g.bbox.max_lon : g.bbox.min_lon + (c + 1) * w,
                      r + 1 == rows ? g.bbox.max_lat : g.bbox.min_lat + (r + 1) * h};
            z.centroid = {(z.cell.min_lon + z.cell.max_lon) / 2, (z.cell.min_lat + z.cell.max_lat) / 2};
            g.zones.push_back(z);
        }
    for (const auto& [id, n]: network.nodes())
    {
        const int z = g.zone_of(n.lon, n.lat);
        if (z >= 0)
        {
            ++g.zones[z].node_count;
            g.zones[z].nodes.push_back(id);
        }
    }
    return g;
}

ODMatrix::ODMatrix(int zones, std::vector<int> hours)
    : _zones(zones)
    , _hours(std::move(hours))
{
    require(zones >= 1, "OD matrix needs at least one zone");
    require(!_hours.empty(), "OD matrix needs at least one hour");
    _trips.assign(static_cast<std::size_t>(zones) * zones * _hours.size(), 0.0);
    validate();
}

std::size_t ODMatrix::index(int o, int d, std::size_t h) const
{
    if (o < 0 || o >= _zones || d < 0 || d >= _zones || h >= _hours.size())
        fail(Errc::InvalidArgument, "OD index out of range");
    return (static_cast<std::size_t>(o) * _zones + d) * _hours.size() + h;
}

double ODMatrix::at(int o, int d, std::size_t h) const
{
    return _trips[index(o, d, h)];
}

double& ODMatrix::at(int o, int d, std::size_t h)
{
    return _trips[index(o, d, h)];
}

double ODMatrix::hour_total(std::size_t h) const
{
    double s = 0.0;
    for (int o = 0; o < _zones; ++o)
        for (int d = 0; d < _zones; ++d)
            s += at(o, d, h);
    return s;
}

double ODMatrix::max() const noexcept
{
    double m = 0.0;
    for (double v: _trips)
        m = std::max(m, v);
    return m;
}

void ODMatrix::validate() const
{
    require(_trips.size() == static_cast<std::size_t>(_zones) * _zones * _hours.size(), "OD dimensions inconsistent");
    std::set<int> seen;
    for (int h: _hours)
    {
        require(h >= 0 && h <= 23, "OD hour " + std::to_string(h) + " outside 0..23");
        require(seen.insert(h).second, "OD hour " + std::to_string(h) + " repeated");
    }
    for (double v: _trips)
        require(std::isfinite(v) && v >= 0.0, "OD entries must be finite and non-negative");
}

ODMatrix generate_demand(const ZoneGrid& zones, double total_trips_per_hour, double beta, const std::vector<int>& hours)
{
    require(total_trips_per_hour > 0.0 && std::isfinite(total_trips_per_hour), "total trips per hour must be positive");
    require(beta >= 0.0 && std::isfinite(beta), "beta must be non-negative");
    require(!zones.zones.empty(), "zone grid is empty");
    const int n = static_cast<int>(zones.zones.size());
    bool any = false;
    for (const auto& z: zones.zones)
        any = any || z.node_count > 0;
    if (!any)
        fail(Errc::AllZonesEmpty, "every zone has zero nodes");

    std::vector<double> base(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
        {
            const auto& zi = zones.zones[i];
            const auto& zj = zones.zones[j];
            if (zi.node_count == 0 || zj.node_count == 0)
                continue;
            double d = 0.0;
            if (i == j)
                d = haversine_m({zi.cell.min_lon, zi.cell.min_lat}, {zi.cell.max_lon, zi.cell.max_lat}) / 2.0;
            else
                d = haversine_m(zi.centroid, zj.centroid);
            const double impedance = beta == 0.0 ? 1.0 : std::pow(std::max(d, 1.0), -beta);
            base[static_cast<std::size_t>(i) * n + j] = static_cast<double>(zi.node_count) * zj.node_count * impedance;
        }
    const double sum = kernels::sum(base);
    kernels::scale(base, total_trips_per_hour / sum);

    ODMatrix od(n, hours);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (std::size_t h = 0; h < hours.size(); ++h)
                od.at(i, j, h) = base[static_cast<std::size_t>(i) * n + j];
    return od;
}

void write_demand_csv(const ODMatrix& od, const std::filesystem::path& path)
{
    std::ostringstream out;
    out << "o_zone,d_zone,hour,volume\n";
    for (int o = 0; o < od.zones(); ++o)
        for (int d = 0; d < od.zones(); ++d)
            for (std::size_t h = 0; h < od.hour_count(); ++h)
                out << o << ',' << d << ',' << od.hours()[h] << ',' << format_fixed(od.at(o, d, h), 6) << '\n';
    write_file(path.string(), out.str());
}

namespace
{

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path, std::string_view header)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(Errc::IoError, "cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || trim(line) != header)
        fail(Errc::SchemaError, path.filename().string() + ": expected header '" + std::string(header) + "'");
    std::vector<std::vector<std::string>> rows;
    int lineno = 1;
    while (std::getline(in, line))
    {
        ++lineno;
        if (trim(line).empty())
            continue;
        auto cells = split(trim(line), ',');
        if (cells.size() != 3 && cells.size() != 4)
            fail(Errc::SchemaError, path.filename().string() + " line " + std::to_string(lineno) + ": wrong field count");
        rows.push_back(std::move(cells));
    }
    return rows;
}

double to_num(const std::string& s, const std::filesystem::path& path)
{
    const auto t = trim(s);
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || *end != '\0' || !std::isfinite(v))
        fail(Errc::SchemaError, path.filename().string() + ": '" + s + "' is not a number");
    return v;
}

} // namespace

ODMatrix read_demand_csv(const std::filesystem::path& path)
{
    const auto rows = read_csv(path, "o_zone,d_zone,hour,volume");
    int zones = 0;
    std::set<int> hours;
    for (const auto& r: rows)
    {
        if (r.size() != 4)
            fail(Errc::SchemaError, "demand.csv rows need 4 fields");
        zones = std::max({zones, static_cast<int>(to_num(r[0], path)) + 1, static_cast<int>(to_num(r[1], path)) + 1});
        hours.insert(static_cast<int>(to_num(r[2], path)));
    }
    if (rows.empty())
        fail(Errc::SchemaError, "demand.csv has no rows");
    ODMatrix od(zones, {hours.begin(), hours.end()});
    std::map<int, std::size_t> hidx;
    for (std::size_t i = 0; i < od.hour_count(); ++i)
        hidx[od.hours()[i]] = i;
    for (const auto& r: rows)
    {
        const double v = to_num(r[3], path);
        if (v < 0)
            fail(Errc::SchemaError, "demand.csv volume is negative");
        od.at(static_cast<int>(to_num(r[0], path)), static_cast<int>(to_num(r[1], path)),
              hidx.at(static_cast<int>(to_num(r[2], path)))) = v;
    }
    return od;
}

std::vector<ObservationSeries> read_counts_csv(const std::filesystem::path& path)
{
    const auto rows = read_csv(path, "link_id,hour,count");
    std::vector<ObservationSeries> out;
    std::map<std::int64_t, std::map<int, int>> by_link;
    std::vector<std::int64_t> order;
    for (const auto& r: rows)
    {
        if (r.size() != 3)
            fail(Errc::SchemaError, "counts.csv rows need 3 fields");
        const auto link = static_cast<std::int64_t>(to_num(r[0], path));
        const int hour = static_cast<int>(to_num(r[1], path));
        const double count = to_num(r[2], path);
        if (count < 0 || std::floor(count) != count)
            fail(Errc::SchemaError, "counts.csv count must be a non-negative integer");
        if (!by_link.count(link))
            order.push_back(link);
        if (!by_link[link].emplace(hour, static_cast<int>(count)).second)
            fail(Errc::SchemaError, "counts.csv repeats link " + r[0] + " hour " + r[1]);
    }
    for (auto link: order)
    {
        ObservationSeries s;
        s.link_id = link;
        for (const auto& [h, c]: by_link[link])
        {
            s.hours.push_back(h);
            s.counts.push_back(c);
        }
        out.push_back(std::move(s));
    }
    return out;
}

void write_counts_csv(const std::vector<ObservationSeries>& series, const std::filesystem::path& path)
{
    std::ostringstream out;
    out << "link_id,hour,count\n";
    for (const auto& s: series)
    {
        require(s.hours.size() == s.counts.size(), "observation series hours and counts differ in length");
        for (std::size_t i = 0; i < s.hours.size(); ++i)
            out << s.link_id << ',' << s.hours[i] << ',' << s.counts[i] << '\n';
    }
    write_file(path.string(), out.str());
}

std::string render_heatmap_svg(const ODMatrix& od, std::size_t h)
{
    require(h < od.hour_count(), "hour index out of range");
    const int n = od.zones();
    double vmax = 0.0;
    for (int o = 0; o < n; ++o)
        for (int d = 0; d < n; ++d)
            vmax = std::max(vmax, od.at(o, d, h));
    const double cell = std::clamp(600.0 / n, 4.0, 60.0);
    const double left = 60.0, top = 50.0;
    const double size = cell * n;
    const double width = left + size + 40, height = top + size + 60;
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << format_fixed(width, 0) << "\" height=\""
      << format_fixed(height, 0) << "\">\n";
    o << "<text x=\"" << left << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">OD demand, hour "
      << od.hours()[h] << "</text>\n";
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
        {
            const double v = od.at(i, j, h);
            const int level = vmax > 0.0 ? 255 - static_cast<int>(std::lround(255.0 * v / vmax)) : 255;
            o << "<rect x=\"" << format_fixed(left + j * cell, 2) << "\" y=\"" << format_fixed(top + i * cell, 2)
              << "\" width=\"" << format_fixed(cell, 2) << "\" height=\"" << format_fixed(cell, 2) << "\" fill=\"rgb("
              << level << "," << level << "," << level << ")\" stroke=\"#999\" stroke-width=\"0.5\"/>\n";
        }
    o << "<text x=\"8\" y=\"" << format_fixed(top + size / 2, 0)
      << "\" font-family=\"sans-serif\" font-size=\"12\">origin</text>\n";
    o << "<text x=\"" << format_fixed(left + size / 2 - 30, 0) << "\" y=\"" << format_fixed(top - 6, 0)
      << "\" font-family=\"sans-serif\" font-size=\"12\">destination</text>\n";
    o << "<text x=\"" << left << "\" y=\"" << format_fixed(top + size + 30, 0)
      << "\" font-family=\"sans-serif\" font-size=\"12\">white 0, black max " << format_general(vmax) << "</text>\n";
    o << "</svg>\n";
    return o.str();
}

DemandArtifacts visualize_demand(const ODMatrix& od, const std::filesystem::path& out_dir)
{
    od.validate();
    DemandArtifacts a;
    a.csv = out_dir / "demand.csv";
    write_demand_csv(od, a.csv);
    for (std::size_t h = 0; h < od.hour_count(); ++h)
    {
        const auto p = out_dir / ("demand_h" + std::to_string(od.hours()[h]) + ".svg");
        write_file(p.string(), render_heatmap_svg(od, h));
        a.heatmaps.push_back(p);
    }
    return a;
}

} // namespace openti::demand
