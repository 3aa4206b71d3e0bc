// SPDX-License-Identifier: Apache-2.0
#include <openti/core/env.hpp>
#include <openti/core/error.hpp>
#include <openti/core/text.hpp>
#include <openti/core/url.hpp>
#include <openti/geo/geo.hpp>
#include <openti/network/osm.hpp>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>

namespace openti::geo
{

GeoConfig GeoConfig::from_env()
{
    GeoConfig c;
    c.offline = offline_from_env();
    c.data_dir = openti::data_dir();
    if (auto v = env_var("OPENTI_GEOCODER_URL"))
        c.geocoder_url = *v;
    if (auto v = env_var("OPENTI_OSM_API_URL"))
        c.osm_api_url = *v;
    return c;
}

namespace
{

std::string normalize(std::string_view s)
{
    std::string out;
    bool space = true;
    for (char ch: s)
    {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c))
        {
            out += static_cast<char>(std::tolower(c));
            space = false;
        }
        else if (!space)
        {
            out += ' ';
            space = true;
        }
    }
    while (!out.empty() && out.back() == ' ')
        out.pop_back();
    return out;
}

bool contains_words(const std::string& hay, const std::string& needle)
{
    return !needle.empty() && (" " + hay + " ").find(" " + needle + " ") != std::string::npos;
}

BBox fixture_lookup(const std::string& place, const GeoConfig& config)
{
    const auto path = config.data_dir / "geocoder.json";
    nlohmann::json doc;
    try
    {
        doc = nlohmann::json::parse(read_file(path.string()));
    }
    catch (const nlohmann::json::exception& e)
    {
        fail(Errc::ServiceError, "geocoder fixture " + path.string() + " is not valid JSON: " + e.what());
    }
    const auto q = normalize(place);
    struct Entry
    {
        std::vector<std::string> names;
        BBox bbox;
    };
    std::vector<Entry> entries;
    for (const auto& item: doc)
    {
        Entry e;
        e.names.push_back(normalize(item.at("name").get<std::string>()));
        for (const auto& a: item.value("aliases", nlohmann::json::array()))
            e.names.push_back(normalize(a.get<std::string>()));
        const auto b = item.at("bbox").get<std::array<double, 4>>();
        e.bbox = BBox::from_array(b);
        entries.push_back(std::move(e));
    }
    // Exact name, then a known name inside the query, then the query inside a name.
    for (int tier = 0; tier < 3; ++tier)
        for (const auto& e: entries)
            for (const auto& n: e.names)
            {
                const bool hit = tier == 0 ? n == q : (tier == 1 ? contains_words(q, n) : contains_words(n, q));
                if (hit)
                    return e.bbox;
            }
    fail(Errc::NotFound, "no geocoder match for '" + place + "'");
}

httplib::Result http_get(const std::string& url, const std::string& query, const GeoConfig& config)
{
    const auto parts = split_url(url);
    httplib::Client client(parts.origin);
    client.set_connection_timeout(config.timeout);
    client.set_read_timeout(config.timeout);
    client.set_follow_location(true);
    return client.Get(parts.path + "?" + query, {{"User-Agent", config.user_agent}});
}

BBox remote_lookup(const std::string& place, const GeoConfig& config)
{
    const auto res = http_get(config.geocoder_url, "q=" + url_encode(place) + "&format=json&limit=1", config);
    if (!res)
        fail(Errc::ServiceError, "geocoder unreachable: " + httplib::to_string(res.error()));
    if (res->status != 200)
        fail(Errc::ServiceError, "geocoder returned HTTP " + std::to_string(res->status));
    try
    {
        const auto doc = nlohmann::json::parse(res->body);
        if (!doc.is_array() || doc.empty())
            fail(Errc::NotFound, "no geocoder match for '" + place + "'");
        const auto& bb = doc[0].at("boundingbox");
        auto num = [](const nlohmann::json& v) { return v.is_string() ? std::stod(v.get<std::string>()) : v.get<double>(); };
        // Nominatim order: [min_lat, max_lat, min_lon, max_lon]
        BBox box {num(bb.at(2)), num(bb.at(0)), num(bb.at(3)), num(bb.at(1))};
        if (!box.valid())
            fail(Errc::ServiceError, "geocoder returned an invalid bounding box");
        return box;
    }
    catch (const Error&)
    {
        throw;
    }
    catch (const std::exception& e)
    {
        fail(Errc::ServiceError, std::string("unexpected geocoder response: ") + e.what());
    }
}

} // namespace

BBox query_area_range(const std::string& place, const GeoConfig& config)
{
    require(!trim(place).empty(), "place name is empty");
    return config.offline ? fixture_lookup(trim(place), config) : remote_lookup(trim(place), config);
}

std::string osm_file_name(const BBox& bbox)
{
    return "map_" + format_coord(bbox.min_lon) + "_" + format_coord(bbox.min_lat) + "_" + format_coord(bbox.max_lon) +
           "_" + format_coord(bbox.max_lat) + ".osm";
}

std::filesystem::path download_osm(const BBox& bbox, const std::filesystem::path& out_dir, const GeoConfig& config)
{
    bbox.validate();
    if (bbox.area_deg2() > kMaxDownloadAreaDeg2)
        fail(Errc::AreaTooLarge, "requested area " + format_general(bbox.area_deg2()) + " deg^2 exceeds " +
                                     format_general(kMaxDownloadAreaDeg2));
    const auto dest = out_dir / osm_file_name(bbox);
    if (config.offline)
    {
        std::vector<std::filesystem::path> fixtures;
        const auto dir = config.data_dir / "osm";
        if (std::filesystem::is_directory(dir))
            for (const auto& entry: std::filesystem::directory_iterator(dir))
                if (entry.path().extension() == ".osm")
                    fixtures.push_back(entry.path());
        std::sort(fixtures.begin(), fixtures.end());
        for (const auto& f: fixtures)
        {
            const auto bounds = network::osm_bounds(f.string());
            if (bounds && bounds->contains(bbox, 1e-9))
            {
                write_file(dest.string(), read_file(f.string()));
                return dest;
            }
        }
        fail(Errc::NoFixture, "no bundled extract covers " + bbox.to_csv());
    }
    const auto res = http_get(config.osm_api_url, "bbox=" + bbox.to_csv(), config);
    if (!res)
        fail(Errc::ServiceError, "OSM service unreachable: " + httplib::to_string(res.error()));
    if (res->status != 200)
        fail(Errc::ServiceError, "OSM service returned HTTP " + std::to_string(res->status));
    if (res->body.find("<osm") == std::string::npos)
        fail(Errc::ServiceError, "OSM service response has no <osm> root");
    write_file(dest.string(), res->body);
    return dest;
}

std::string share_link(const BBox& bbox)
{
    return "https://www.openstreetmap.org/?bbox=" + bbox.to_csv();
}

namespace
{

// Equirectangular projection onto a 1000-px-wide canvas, with the standard
// parallel at the box's middle latitude.
struct Projection
{
    BBox box;
    double width = kMapWidthPx;
    double height = 0.0;
    double margin = 20.0;

    explicit Projection(BBox b)
        : box(b)
    {
        const double mid = (b.min_lat + b.max_lat) / 2.0 * std::numbers::pi / 180.0;
        const double aspect = (b.max_lat - b.min_lat) / ((b.max_lon - b.min_lon) * std::cos(mid));
        height = std::clamp(std::round((width - 2 * margin) * aspect) + 2 * margin, 2 * margin + 1, 4000.0);
    }
    [[nodiscard]] double x(double lon) const
    {
        return margin + (lon - box.min_lon) / (box.max_lon - box.min_lon) * (width - 2 * margin);
    }
    [[nodiscard]] double y(double lat) const
    {
        return height - margin - (lat - box.min_lat) / (box.max_lat - box.min_lat) * (height - 2 * margin);
    }
};

std::string px(double v)
{
    return format_fixed(v, 2);
}

std::string svg_open(const Projection& p)
{
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kMapWidthPx << "\" height=\"" << px(p.height)
      << "\" viewBox=\"0 0 " << kMapWidthPx << " " << px(p.height) << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << kMapWidthPx << "\" height=\"" << px(p.height) << "\" fill=\"#f7f7f2\"/>\n";
    return o.str();
}

const char* mode_color(const network::ModeSet& m)
{
    using network::Mode;
    if (m.contains(Mode::drive))
        return "#c0392b";
    if (m.contains(Mode::bike))
        return "#27ae60";
    if (m.contains(Mode::walk))
        return "#8e44ad";
    return "#2c3e50";
}

} // namespace

std::string render_area_svg(const BBox& bbox)
{
    bbox.validate();
    const double pad_lon = (bbox.max_lon - bbox.min_lon) * 0.25;
    const double pad_lat = (bbox.max_lat - bbox.min_lat) * 0.25;
    const Projection p({bbox.min_lon - pad_lon, bbox.min_lat - pad_lat, bbox.max_lon + pad_lon, bbox.max_lat + pad_lat});
    std::ostringstream o;
    o << svg_open(p);
    const double x0 = p.x(bbox.min_lon), x1 = p.x(bbox.max_lon), y0 = p.y(bbox.max_lat), y1 = p.y(bbox.min_lat);
    o << "<rect x=\"" << px(x0) << "\" y=\"" << px(y0) << "\" width=\"" << px(x1 - x0) << "\" height=\"" << px(y1 - y0)
      << "\" fill=\"#3498db\" fill-opacity=\"0.15\" stroke=\"#2471a3\" stroke-width=\"3\"/>\n";
    const double cx = (x0 + x1) / 2, cy = (y0 + y1) / 2;
    o << "<line x1=\"" << px(cx - 12) << "\" y1=\"" << px(cy) << "\" x2=\"" << px(cx + 12) << "\" y2=\"" << px(cy)
      << "\" stroke=\"#2471a3\" stroke-width=\"2\"/>\n";
    o << "<line x1=\"" << px(cx) << "\" y1=\"" << px(cy - 12) << "\" x2=\"" << px(cx) << "\" y2=\"" << px(cy + 12)
      << "\" stroke=\"#2471a3\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << px(p.margin) << "\" y=\"" << px(p.height - 6) << "\" font-family=\"sans-serif\" font-size=\"14\">"
      << xml_escape("[" + bbox.to_csv() + "]") << "</text>\n";
    o << "</svg>\n";
    return o.str();
}

std::string render_network_svg(const network::RoadNetwork& network)
{
    if (network.empty())
        fail(Errc::EmptyNetwork, "network has no nodes to draw");
    auto ext = network.extent();
    const double span_lon = ext.max_lon - ext.min_lon, span_lat = ext.max_lat - ext.min_lat;
    const double pad_lon = std::max(span_lon * 0.05, 1e-4), pad_lat = std::max(span_lat * 0.05, 1e-4);
    const Projection p({ext.min_lon - pad_lon, ext.min_lat - pad_lat, ext.max_lon + pad_lon, ext.max_lat + pad_lat});
    std::ostringstream o;
    o << svg_open(p);
    for (const auto& l: network.links())
    {
        const auto& a = network.node(l.from);
        const auto& b = network.node(l.to);
        o << "<polyline points=\"" << px(p.x(a.lon)) << "," << px(p.y(a.lat)) << " " << px(p.x(b.lon)) << ","
          << px(p.y(b.lat)) << "\" fill=\"none\" stroke=\"" << mode_color(l.modes) << "\" stroke-width=\""
          << (1 + l.lanes) << "\" data-link=\"" << l.id << "\"/>\n";
    }
    for (const auto& [id, n]: network.nodes())
        o << "<circle cx=\"" << px(p.x(n.lon)) << "\" cy=\"" << px(p.y(n.lat)) << "\" r=\""
          << (n.control == network::Control::signal ? 5 : 3) << "\" fill=\""
          << (n.control == network::Control::signal ? "#f39c12" : "#34495e") << "\" data-node=\"" << id << "\"/>\n";
    o << "<text x=\"" << px(p.margin) << "\" y=\"" << px(p.height - 6) << "\" font-family=\"sans-serif\" font-size=\"14\">"
      << network.nodes().size() << " nodes, " << network.links().size() << " links</text>\n";
    o << "</svg>\n";
    return o.str();
}

MapArtifact show_on_map(const BBox& bbox, const std::filesystem::path& out_dir)
{
    const auto svg = render_area_svg(bbox);
    const auto path = out_dir / "map_area.svg";
    write_file(path.string(), svg);
    return {path, share_link(bbox), bbox};
}

MapArtifact show_on_map(const network::RoadNetwork& network, const std::filesystem::path& out_dir)
{
    const auto svg = render_network_svg(network);
    const auto path = out_dir / "map_network.svg";
    write_file(path.string(), svg);
    auto ext = network.extent();
    if (!ext.valid())
        ext = {ext.min_lon - 1e-4, ext.min_lat - 1e-4, ext.max_lon + 1e-4, ext.max_lat + 1e-4};
    return {path, share_link(ext), ext};
}

} // namespace openti::geo
