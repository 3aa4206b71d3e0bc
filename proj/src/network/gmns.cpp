// SPDX-License-Identifier: Apache-2.0
#include <openti/core/error.hpp>
#include <openti/core/text.hpp>
#include <openti/network/gmns.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace openti::network
{

namespace
{

constexpr std::string_view kNodeHeader = "node_id,x_coord,y_coord,ctrl_type";
constexpr std::string_view kLinkHeader = "link_id,from_node_id,to_node_id,length,lanes,free_speed,allowed_uses";

std::vector<std::vector<std::string>> read_rows(const std::filesystem::path& path, std::string_view header)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(Errc::IoError, "cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || trim(line) != header)
        fail(Errc::SchemaError, path.filename().string() + ": expected header '" + std::string(header) + "'");
    const auto cols = split(header, ',').size();
    std::vector<std::vector<std::string>> rows;
    int lineno = 1;
    while (std::getline(in, line))
    {
        ++lineno;
        if (trim(line).empty())
            continue;
        auto cells = split(trim(line), ',');
        if (cells.size() != cols)
            fail(Errc::SchemaError,
                 path.filename().string() + " line " + std::to_string(lineno) + ": expected " + std::to_string(cols) + " fields");
        rows.push_back(std::move(cells));
    }
    return rows;
}

template <class T>
T number(const std::string& cell, const std::filesystem::path& file)
{
    const auto s = trim(cell);
    char* end = nullptr;
    T v {};
    if constexpr (std::is_integral_v<T>)
        v = static_cast<T>(std::strtoll(s.c_str(), &end, 10));
    else
        v = static_cast<T>(std::strtod(s.c_str(), &end));
    if (s.empty() || *end != '\0')
        fail(Errc::SchemaError, file.filename().string() + ": '" + cell + "' is not a number");
    return v;
}

} // namespace

GmnsPaths to_gmns(const RoadNetwork& network, const std::filesystem::path& out_dir)
{
    require(!network.empty(), "cannot write an empty network");
    std::ostringstream nodes, links;
    nodes << kNodeHeader << '\n';
    for (const auto& [id, n]: network.nodes())
        nodes << id << ',' << format_fixed(n.lon, 6) << ',' << format_fixed(n.lat, 6) << ','
              << (n.control == Control::signal ? "signal" : "none") << '\n';
    links << kLinkHeader << '\n';
    for (const auto& l: network.links())
        links << l.id << ',' << l.from << ',' << l.to << ',' << format_fixed(l.length_m, 6) << ',' << l.lanes << ','
              << format_fixed(l.free_speed, 6) << ',' << l.modes.to_string() << '\n';
    GmnsPaths paths {out_dir / "node.csv", out_dir / "link.csv"};
    write_file(paths.node_csv.string(), nodes.str());
    write_file(paths.link_csv.string(), links.str());
    return paths;
}

RoadNetwork read_gmns(const std::filesystem::path& dir)
{
    RoadNetwork net;
    const auto node_path = dir / "node.csv";
    const auto link_path = dir / "link.csv";
    for (const auto& r: read_rows(node_path, kNodeHeader))
    {
        Control ctrl = Control::none;
        if (r[3] == "signal")
            ctrl = Control::signal;
        else if (r[3] != "none" && !r[3].empty())
            fail(Errc::SchemaError, "node.csv: unknown ctrl_type '" + r[3] + "'");
        net.add_node({number<std::int64_t>(r[0], node_path), number<double>(r[1], node_path),
                      number<double>(r[2], node_path), ctrl});
    }
    for (const auto& r: read_rows(link_path, kLinkHeader))
    {
        Link l;
        l.id = number<std::int64_t>(r[0], link_path);
        l.from = number<std::int64_t>(r[1], link_path);
        l.to = number<std::int64_t>(r[2], link_path);
        l.length_m = number<double>(r[3], link_path);
        l.lanes = number<int>(r[4], link_path);
        l.free_speed = number<double>(r[5], link_path);
        try
        {
            l.modes = ModeSet::parse(r[6]);
            net.add_link(l);
        }
        catch (const Error& e)
        {
            fail(Errc::SchemaError, "link.csv: link " + r[0] + ": " + e.what());
        }
    }
    net.build_signal_plans();
    return net;
}

FilterResult filter_network(const RoadNetwork& network, Mode mode, const std::filesystem::path& out_dir)
{
    auto sub = select_mode(network, mode);
    if (sub.links().empty())
        fail(Errc::EmptyResult, "no links allow mode '" + std::string(to_string(mode)) + "'");
    const auto dir = out_dir / ("gmns_" + std::string(to_string(mode)));
    to_gmns(sub, dir);
    return {std::move(sub), dir};
}

} // namespace openti::network
