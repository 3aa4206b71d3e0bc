// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <openti/core/bbox.hpp>
#include <openti/core/geodesy.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace openti::network
{

enum class Mode : std::uint8_t
{
    drive = 1,
    bike = 2,
    walk = 4,
    rail = 8,
};

inline constexpr Mode kAllModes[] = {Mode::drive, Mode::bike, Mode::walk, Mode::rail};

std::string_view to_string(Mode mode) noexcept;
Mode mode_from_string(std::string_view s);

/// Bit set over Mode.
class ModeSet
{
public:
    constexpr ModeSet() = default;
    constexpr ModeSet(std::initializer_list<Mode> modes)
    {
        for (auto m: modes)
            insert(m);
    }
    constexpr void insert(Mode m) noexcept { _bits |= static_cast<std::uint8_t>(m); }
    [[nodiscard]] constexpr bool contains(Mode m) const noexcept { return _bits & static_cast<std::uint8_t>(m); }
    [[nodiscard]] constexpr bool empty() const noexcept { return _bits == 0; }
    [[nodiscard]] constexpr std::uint8_t bits() const noexcept { return _bits; }

    /// "drive;bike" in the fixed order drive, bike, walk, rail.
    [[nodiscard]] std::string to_string() const;
    static ModeSet parse(std::string_view s);

    friend constexpr bool operator==(ModeSet, ModeSet) = default;

private:
    std::uint8_t _bits = 0;
};

enum class Control
{
    none,
    signal,
};

struct Node
{
    std::int64_t id = 0;
    double lon = 0.0;
    double lat = 0.0;
    Control control = Control::none;

    [[nodiscard]] LonLat pos() const noexcept { return {lon, lat}; }
};

struct Link
{
    std::int64_t id = 0;
    std::int64_t from = 0;
    std::int64_t to = 0;
    double length_m = 0.0;
    int lanes = 1;
    double free_speed = 0.0; // m/s
    ModeSet modes;
};

struct Movement
{
    std::int64_t in_link = 0;
    std::int64_t out_link = 0;

    friend bool operator==(const Movement&, const Movement&) = default;
    friend bool operator<(const Movement& a, const Movement& b)
    {
        return a.in_link != b.in_link ? a.in_link < b.in_link : a.out_link < b.out_link;
    }
};

struct Phase
{
    std::vector<std::int64_t> approaches; // incoming links given green
    std::vector<Movement> movements;

    friend bool operator==(const Phase&, const Phase&) = default;
};

struct SignalizedIntersection
{
    std::int64_t node_id = 0;
    std::vector<std::int64_t> approaches; // sorted incoming drive links
    std::vector<Phase> phases;

    /// Index of `link` in approaches, or -1.
    [[nodiscard]] int approach_index(std::int64_t link) const noexcept;
    [[nodiscard]] bool serves(std::size_t phase, std::int64_t in_link, std::int64_t out_link) const noexcept;
};

/// Directed road graph. Links are kept in id order; node and link lookups
/// are indexed.
class RoadNetwork
{
public:
    void add_node(const Node& node);
    /// Endpoints must exist; throws InvalidArgument on a self-loop, a
    /// non-positive length/speed or lanes < 1, or a duplicate id.
    void add_link(const Link& link);

    [[nodiscard]] const std::map<std::int64_t, Node>& nodes() const noexcept { return _nodes; }
    [[nodiscard]] const std::vector<Link>& links() const noexcept { return _links; }
    [[nodiscard]] const std::vector<SignalizedIntersection>& intersections() const noexcept { return _intersections; }

    [[nodiscard]] const Node& node(std::int64_t id) const;
    [[nodiscard]] const Link& link(std::int64_t id) const;
    [[nodiscard]] const Node* find_node(std::int64_t id) const noexcept;
    [[nodiscard]] const Link* find_link(std::int64_t id) const noexcept;
    [[nodiscard]] std::size_t link_index(std::int64_t id) const;

    [[nodiscard]] const std::vector<std::int64_t>& out_links(std::int64_t node) const;
    [[nodiscard]] const std::vector<std::int64_t>& in_links(std::int64_t node) const;
    [[nodiscard]] const SignalizedIntersection* intersection_at(std::int64_t node) const noexcept;

    [[nodiscard]] bool empty() const noexcept { return _nodes.empty(); }
    [[nodiscard]] BBox extent() const;

    /// Recomputes the default plan at every signal node from link bearings.
    /// Signal nodes with fewer than two drive approaches become uncontrolled.
    void build_signal_plans();

    /// Throws InvalidArgument naming the first violated invariant.
    void validate() const;

private:
    void set_control(std::int64_t node, Control control);

    std::map<std::int64_t, Node> _nodes;
    std::vector<Link> _links;
    std::map<std::int64_t, std::size_t> _link_index;
    std::map<std::int64_t, std::vector<std::int64_t>> _out;
    std::map<std::int64_t, std::vector<std::int64_t>> _in;
    std::vector<SignalizedIntersection> _intersections;
};

/// Same ids, endpoints, lanes and modes; lengths and speeds within `tol`;
/// node positions within `coord_tol` degrees; same control flags.
bool equivalent(const RoadNetwork& a, const RoadNetwork& b, double tol = 0.01, double coord_tol = 1e-6);

/// Sub-network of links carrying `mode` and their endpoints; signal plans
/// rebuilt. May be empty.
RoadNetwork select_mode(const RoadNetwork& network, Mode mode);

} // namespace openti::network
