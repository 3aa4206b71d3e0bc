// SPDX-License-Identifier: Apache-2.0
#include <openti/core/error.hpp>
#include <openti/core/geodesy.hpp>
#include <openti/core/text.hpp>
#include <openti/network/osm.hpp>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace openti::network
{

namespace pt = boost::property_tree;

namespace
{

struct OsmWay
{
    std::int64_t id = 0;
    std::vector<std::int64_t> refs;
    std::map<std::string, std::string> tags;

    [[nodiscard]] std::string tag(const std::string& k) const
    {
        const auto it = tags.find(k);
        return it == tags.end() ? std::string() : it->second;
    }
    [[nodiscard]] bool has(const std::string& k) const { return tags.count(k) > 0; }
};

struct OsmNode
{
    LonLat pos;
    bool signal = false;
};

const std::set<std::string> kDriveClasses {"motorway", "trunk",       "primary",     "secondary",
                                           "tertiary", "residential", "unclassified"};
const std::set<std::string> kWalkClasses {"footway", "path", "pedestrian"};
const std::set<std::string> kRailClasses {"rail", "light_rail", "subway", "tram"};

std::string base_class(std::string highway)
{
    constexpr std::string_view suffix = "_link";
    if (highway.size() > suffix.size() && highway.compare(highway.size() - suffix.size(), suffix.size(), suffix) == 0)
        highway.resize(highway.size() - suffix.size());
    return highway;
}

ModeSet modes_of(const OsmWay& w)
{
    ModeSet m;
    const auto highway = w.tag("highway");
    const auto cls = base_class(highway);
    if (kDriveClasses.count(cls))
        m.insert(Mode::drive);
    if (highway == "cycleway" || (w.has("cycleway") && w.tag("cycleway") != "no") || w.tag("bicycle") == "yes")
        m.insert(Mode::bike);
    if (kWalkClasses.count(highway) || (w.has("sidewalk") && w.tag("sidewalk") != "no"))
        m.insert(Mode::walk);
    if (kRailClasses.count(w.tag("railway")))
        m.insert(Mode::rail);
    return m;
}

double default_speed(const OsmWay& w)
{
    static const std::map<std::string, double> speeds {
        {"motorway", 27.8},    {"trunk", 22.2},        {"primary", 16.7},  {"secondary", 13.9},
        {"tertiary", 12.5},    {"residential", 11.1},  {"unclassified", 11.1}, {"cycleway", 4.2},
        {"footway", 4.2},      {"path", 4.2},          {"pedestrian", 4.2}};
    if (w.has("railway") && !w.has("highway"))
        return 22.2;
    const auto it = speeds.find(base_class(w.tag("highway")));
    return it == speeds.end() ? 11.1 : it->second;
}

// "50", "50 km/h", "30 mph", "30mph"; nullopt when unparseable.
std::optional<double> parse_maxspeed(const std::string& raw)
{
    const auto s = trim(raw);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || !(v > 0.0) || !std::isfinite(v))
        return std::nullopt;
    const auto unit = to_lower(trim(end));
    if (unit.empty() || unit == "km/h" || unit == "kmh" || unit == "kph")
        return v / 3.6;
    if (unit == "mph")
        return v * 0.44704;
    if (unit == "knots")
        return v * 0.514444;
    return std::nullopt;
}

int default_lanes(const OsmWay& w)
{
    const auto cls = base_class(w.tag("highway"));
    return (cls == "motorway" || cls == "trunk" || cls == "primary") ? 2 : 1;
}

// +1 forward only, -1 reverse only, 0 both directions.
int oneway_of(const OsmWay& w)
{
    const auto ow = to_lower(w.tag("oneway"));
    if (ow == "yes" || ow == "true" || ow == "1")
        return 1;
    if (ow == "-1" || ow == "reverse")
        return -1;
    if (ow == "no" || ow == "false" || ow == "0")
        return 0;
    if (w.tag("junction") == "roundabout" || w.tag("highway") == "motorway")
        return 1;
    return 0;
}

RoadNetwork build(const pt::ptree& root, OsmParseStats& stats)
{
    const auto osm_it = root.find("osm");
    if (osm_it == root.not_found())
        fail(Errc::MalformedXml, "root element is not <osm>");
    const auto& osm = osm_it->second;

    std::unordered_map<std::int64_t, OsmNode> nodes;
    std::vector<OsmWay> ways;
    for (const auto& [name, child]: osm)
    {
        if (name == "node")
        {
            const auto id = child.get<std::int64_t>("<xmlattr>.id", 0);
            const auto lat = child.get_optional<double>("<xmlattr>.lat");
            const auto lon = child.get_optional<double>("<xmlattr>.lon");
            if (!lat || !lon)
                fail(Errc::MalformedXml, "node " + std::to_string(id) + " lacks lat/lon");
            OsmNode n {{*lon, *lat}, false};
            for (const auto& [tn, tag]: child)
                if (tn == "tag" && tag.get<std::string>("<xmlattr>.k", "") == "highway" &&
                    tag.get<std::string>("<xmlattr>.v", "") == "traffic_signals")
                    n.signal = true;
            nodes[id] = n;
        }
        else if (name == "way")
        {
            OsmWay w;
            w.id = child.get<std::int64_t>("<xmlattr>.id", 0);
            for (const auto& [wn, wc]: child)
            {
                if (wn == "nd")
                    w.refs.push_back(wc.get<std::int64_t>("<xmlattr>.ref", 0));
                else if (wn == "tag")
                    w.tags[wc.get<std::string>("<xmlattr>.k", "")] = wc.get<std::string>("<xmlattr>.v", "");
            }
            ways.push_back(std::move(w));
        }
    }

    // Eligible ways with dangling references removed.
    struct Eligible
    {
        const OsmWay* way;
        std::vector<std::int64_t> refs;
        ModeSet modes;
    };
    std::vector<Eligible> eligible;
    for (const auto& w: ways)
    {
        ++stats.ways_seen;
        if (!w.has("highway") && !w.has("railway"))
            continue;
        const auto modes = modes_of(w);
        if (modes.empty())
            continue;
        Eligible e {&w, {}, modes};
        for (auto r: w.refs)
        {
            if (!nodes.count(r))
            {
                ++stats.dangling_refs;
                continue;
            }
            if (e.refs.empty() || e.refs.back() != r)
                e.refs.push_back(r);
        }
        if (e.refs.size() >= 2)
            eligible.push_back(std::move(e));
    }

    std::unordered_map<std::int64_t, int> use_count;
    for (const auto& e: eligible)
        for (auto r: e.refs)
            ++use_count[r];

    RoadNetwork net;
    std::int64_t next_link = 1;
    auto ensure_node = [&](std::int64_t id) {
        if (!net.find_node(id))
        {
            const auto& n = nodes.at(id);
            net.add_node({id, n.pos.lon, n.pos.lat, n.signal ? Control::signal : Control::none});
        }
    };

    for (const auto& e: eligible)
    {
        const auto& w = *e.way;
        std::vector<std::size_t> cuts {0};
        for (std::size_t i = 1; i + 1 < e.refs.size(); ++i)
        {
            const auto r = e.refs[i];
            if (use_count[r] > 1 || nodes.at(r).signal)
                cuts.push_back(i);
        }
        cuts.push_back(e.refs.size() - 1);

        // A piece that starts and ends on the same node is split in the middle.
        std::vector<std::size_t> fixed {cuts.front()};
        for (std::size_t k = 1; k < cuts.size(); ++k)
        {
            const auto a = fixed.back(), b = cuts[k];
            if (e.refs[a] == e.refs[b] && b - a >= 2)
                fixed.push_back(a + (b - a) / 2);
            fixed.push_back(b);
        }

        const auto maxspeed = parse_maxspeed(w.tag("maxspeed"));
        const double speed = maxspeed.value_or(default_speed(w));
        const int dir = oneway_of(w);
        int lanes = default_lanes(w);
        if (const auto lt = w.tag("lanes"); !lt.empty())
        {
            const int v = std::atoi(lt.c_str());
            if (v >= 1)
                lanes = dir == 0 ? std::max(1, (v + 1) / 2) : v;
        }

        bool used = false;
        for (std::size_t k = 1; k < fixed.size(); ++k)
        {
            const auto a = fixed[k - 1], b = fixed[k];
            double len = 0.0;
            for (std::size_t i = a; i < b; ++i)
                len += haversine_m(nodes.at(e.refs[i]).pos, nodes.at(e.refs[i + 1]).pos);
            const auto from = e.refs[a], to = e.refs[b];
            if (from == to || !(len > 0.0))
            {
                ++stats.degenerate_segments;
                continue;
            }
            ensure_node(from);
            ensure_node(to);
            if (dir >= 0)
                net.add_link({next_link++, from, to, len, lanes, speed, e.modes});
            if (dir <= 0)
                net.add_link({next_link++, to, from, len, lanes, speed, e.modes});
            used = true;
        }
        stats.ways_used += used ? 1 : 0;
    }

    if (net.links().empty())
        fail(Errc::EmptyNetwork, "no eligible highway or railway ways");
    net.build_signal_plans();
    return net;
}

pt::ptree read_tree(std::istream& in, const std::string& what)
{
    pt::ptree tree;
    try
    {
        pt::read_xml(in, tree, pt::xml_parser::no_comments);
    }
    catch (const pt::xml_parser_error& e)
    {
        fail(Errc::MalformedXml, what + ": " + e.what());
    }
    return tree;
}

RoadNetwork parse_tree(const pt::ptree& tree, OsmParseStats* stats)
{
    OsmParseStats local;
    try
    {
        auto net = build(tree, local);
        if (stats)
            *stats = local;
        return net;
    }
    catch (const pt::ptree_error& e)
    {
        fail(Errc::MalformedXml, std::string("bad attribute: ") + e.what());
    }
}

} // namespace

RoadNetwork parse_osm(const std::string& path, OsmParseStats* stats)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(Errc::IoError, "cannot open " + path);
    return parse_tree(read_tree(in, path), stats);
}

RoadNetwork parse_osm_string(const std::string& xml, OsmParseStats* stats)
{
    std::istringstream in(xml);
    return parse_tree(read_tree(in, "osm text"), stats);
}

std::optional<BBox> osm_bounds(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(Errc::IoError, "cannot open " + path);
    const auto tree = read_tree(in, path);
    const auto b = tree.get_child_optional("osm.bounds.<xmlattr>");
    if (!b)
        return std::nullopt;
    try
    {
        BBox box {b->get<double>("minlon"), b->get<double>("minlat"), b->get<double>("maxlon"), b->get<double>("maxlat")};
        if (!box.valid())
            return std::nullopt;
        return box;
    }
    catch (const pt::ptree_error&)
    {
        return std::nullopt;
    }
}

} // namespace openti::network
