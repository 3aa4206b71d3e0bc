// SPDX-License-Identifier: Apache-2.0
#include <openti/core/error.hpp>
#include <openti/core/text.hpp>
#include <openti/network/network.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace openti::network
{

std::string_view to_string(Mode mode) noexcept
{
    switch (mode)
    {
        case Mode::drive: return "drive";
        case Mode::bike: return "bike";
        case Mode::walk: return "walk";
        case Mode::rail: return "rail";
    }
    return "drive";
}

Mode mode_from_string(std::string_view s)
{
    const auto lower = to_lower(trim(s));
    for (auto m: kAllModes)
        if (to_string(m) == lower)
            return m;
    fail(Errc::InvalidArgument, "unknown mode '" + std::string(s) + "'");
}

std::string ModeSet::to_string() const
{
    std::vector<std::string> parts;
    for (auto m: kAllModes)
        if (contains(m))
            parts.emplace_back(network::to_string(m));
    return join(parts, ";");
}

ModeSet ModeSet::parse(std::string_view s)
{
    ModeSet out;
    for (const auto& part: split(s, ';'))
        if (!trim(part).empty())
            out.insert(mode_from_string(part));
    return out;
}

int SignalizedIntersection::approach_index(std::int64_t link) const noexcept
{
    for (std::size_t i = 0; i < approaches.size(); ++i)
        if (approaches[i] == link)
            return static_cast<int>(i);
    return -1;
}

bool SignalizedIntersection::serves(std::size_t phase, std::int64_t in_link, std::int64_t out_link) const noexcept
{
    if (phase >= phases.size())
        return false;
    const auto& mv = phases[phase].movements;
    return std::binary_search(mv.begin(), mv.end(), Movement {in_link, out_link});
}

void RoadNetwork::add_node(const Node& node)
{
    require(std::isfinite(node.lon) && std::isfinite(node.lat), "node " + std::to_string(node.id) + " has bad coordinates");
    require(!_nodes.count(node.id), "duplicate node id " + std::to_string(node.id));
    _nodes.emplace(node.id, node);
    _out[node.id];
    _in[node.id];
}

void RoadNetwork::add_link(const Link& link)
{
    const auto id = std::to_string(link.id);
    require(!_link_index.count(link.id), "duplicate link id " + id);
    require(_nodes.count(link.from) && _nodes.count(link.to), "link " + id + " references a missing node");
    require(link.from != link.to, "link " + id + " is a self-loop");
    require(link.length_m > 0.0 && std::isfinite(link.length_m), "link " + id + " has non-positive length");
    require(link.free_speed > 0.0 && std::isfinite(link.free_speed), "link " + id + " has non-positive speed");
    require(link.lanes >= 1, "link " + id + " has fewer than one lane");
    require(!link.modes.empty(), "link " + id + " carries no mode");
    if (!_links.empty() && link.id < _links.back().id)
    {
        // Keep id order; rebuild the index after an out-of-order insert.
        const auto pos = std::lower_bound(_links.begin(), _links.end(), link.id,
                                          [](const Link& l, std::int64_t v) { return l.id < v; });
        _links.insert(pos, link);
        _link_index.clear();
        for (std::size_t i = 0; i < _links.size(); ++i)
            _link_index[_links[i].id] = i;
    }
    else
    {
        _link_index[link.id] = _links.size();
        _links.push_back(link);
    }
    auto& out = _out[link.from];
    out.insert(std::lower_bound(out.begin(), out.end(), link.id), link.id);
    auto& in = _in[link.to];
    in.insert(std::lower_bound(in.begin(), in.end(), link.id), link.id);
}

const Node& RoadNetwork::node(std::int64_t id) const
{
    const auto* n = find_node(id);
    if (!n)
        fail(Errc::NotFound, "no node " + std::to_string(id));
    return *n;
}

const Link& RoadNetwork::link(std::int64_t id) const
{
    const auto* l = find_link(id);
    if (!l)
        fail(Errc::NotFound, "no link " + std::to_string(id));
    return *l;
}

const Node* RoadNetwork::find_node(std::int64_t id) const noexcept
{
    const auto it = _nodes.find(id);
    return it == _nodes.end() ? nullptr : &it->second;
}

const Link* RoadNetwork::find_link(std::int64_t id) const noexcept
{
    const auto it = _link_index.find(id);
    return it == _link_index.end() ? nullptr : &_links[it->second];
}

std::size_t RoadNetwork::link_index(std::int64_t id) const
{
    const auto it = _link_index.find(id);
    if (it == _link_index.end())
        fail(Errc::NotFound, "no link " + std::to_string(id));
    return it->second;
}

const std::vector<std::int64_t>& RoadNetwork::out_links(std::int64_t node) const
{
    static const std::vector<std::int64_t> none;
    const auto it = _out.find(node);
    return it == _out.end() ? none : it->second;
}

const std::vector<std::int64_t>& RoadNetwork::in_links(std::int64_t node) const
{
    static const std::vector<std::int64_t> none;
    const auto it = _in.find(node);
    return it == _in.end() ? none : it->second;
}

const SignalizedIntersection* RoadNetwork::intersection_at(std::int64_t node) const noexcept
{
    for (const auto& si: _intersections)
        if (si.node_id == node)
            return &si;
    return nullptr;
}

BBox RoadNetwork::extent() const
{
    if (_nodes.empty())
        fail(Errc::EmptyNetwork, "network has no nodes");
    BBox b {std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
            std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};
    for (const auto& [id, n]: _nodes)
    {
        b.min_lon = std::min(b.min_lon, n.lon);
        b.min_lat = std::min(b.min_lat, n.lat);
        b.max_lon = std::max(b.max_lon, n.lon);
        b.max_lat = std::max(b.max_lat, n.lat);
    }
    return b;
}

void RoadNetwork::set_control(std::int64_t node, Control control)
{
    _nodes.at(node).control = control;
}

namespace
{

// Travel direction within 45 degrees of north or south.
bool north_south(double bearing) noexcept
{
    const double b = std::fmod(bearing, 180.0);
    return b <= 45.0 || b > 135.0;
}

} // namespace

void RoadNetwork::build_signal_plans()
{
    _intersections.clear();
    for (auto& [id, node]: _nodes)
    {
        if (node.control != Control::signal)
            continue;
        std::vector<std::int64_t> approaches;
        for (auto l: in_links(id))
            if (link(l).modes.contains(Mode::drive))
                approaches.push_back(l);
        if (approaches.size() < 2)
        {
            node.control = Control::none;
            continue;
        }
        std::vector<std::int64_t> exits;
        for (auto l: out_links(id))
            if (link(l).modes.contains(Mode::drive))
                exits.push_back(l);

        auto movements_of = [&](std::int64_t in) {
            std::vector<Movement> mv;
            const auto back_to = link(in).from;
            for (auto out: exits)
                if (link(out).to != back_to)
                    mv.push_back({in, out});
            if (mv.empty())
                for (auto out: exits)
                    mv.push_back({in, out});
            return mv;
        };

        SignalizedIntersection si;
        si.node_id = id;
        si.approaches = approaches;
        Phase ns, ew;
        for (auto a: approaches)
        {
            const auto& l = link(a);
            auto& ph = north_south(bearing_deg(this->node(l.from).pos(), this->node(l.to).pos())) ? ns : ew;
            ph.approaches.push_back(a);
            for (const auto& m: movements_of(a))
                ph.movements.push_back(m);
        }
        if (!ns.approaches.empty() && !ew.approaches.empty())
            si.phases = {ns, ew};
        else
            for (auto a: approaches)
                si.phases.push_back({{a}, movements_of(a)});
        for (auto& ph: si.phases)
            std::sort(ph.movements.begin(), ph.movements.end());
        _intersections.push_back(std::move(si));
    }
}

void RoadNetwork::validate() const
{
    for (const auto& l: _links)
    {
        const auto id = std::to_string(l.id);
        require(_nodes.count(l.from) && _nodes.count(l.to), "link " + id + " references a missing node");
        require(l.from != l.to, "link " + id + " is a self-loop");
        require(l.length_m > 0.0, "link " + id + " has non-positive length");
        require(l.free_speed > 0.0, "link " + id + " has non-positive speed");
        require(l.lanes >= 1, "link " + id + " has fewer than one lane");
    }
    for (const auto& si: _intersections)
    {
        const auto id = std::to_string(si.node_id);
        require(si.phases.size() >= 2, "intersection " + id + " has fewer than two phases");
        for (auto a: si.approaches)
        {
            bool covered = false;
            for (const auto& ph: si.phases)
                covered = covered || std::count(ph.approaches.begin(), ph.approaches.end(), a) > 0;
            require(covered, "approach " + std::to_string(a) + " of intersection " + id + " is in no phase");
        }
        for (std::size_t i = 0; i < si.phases.size(); ++i)
            for (std::size_t j = i + 1; j < si.phases.size(); ++j)
                require(!(si.phases[i] == si.phases[j]), "intersection " + id + " repeats a phase");
    }
}

bool equivalent(const RoadNetwork& a, const RoadNetwork& b, double tol, double coord_tol)
{
    if (a.nodes().size() != b.nodes().size() || a.links().size() != b.links().size())
        return false;
    for (const auto& [id, na]: a.nodes())
    {
        const auto* nb = b.find_node(id);
        if (!nb || nb->control != na.control || std::abs(nb->lon - na.lon) > coord_tol ||
            std::abs(nb->lat - na.lat) > coord_tol)
            return false;
    }
    for (std::size_t i = 0; i < a.links().size(); ++i)
    {
        const auto& la = a.links()[i];
        const auto& lb = b.links()[i];
        if (la.id != lb.id || la.from != lb.from || la.to != lb.to || la.lanes != lb.lanes || !(la.modes == lb.modes) ||
            std::abs(la.length_m - lb.length_m) > tol || std::abs(la.free_speed - lb.free_speed) > tol)
            return false;
    }
    return true;
}

RoadNetwork select_mode(const RoadNetwork& network, Mode mode)
{
    RoadNetwork out;
    for (const auto& l: network.links())
    {
        if (!l.modes.contains(mode))
            continue;
        for (auto n: {l.from, l.to})
            if (!out.find_node(n))
                out.add_node(network.node(n));
        out.add_link(l);
    }
    out.build_signal_plans();
    return out;
}

} // namespace openti::network
