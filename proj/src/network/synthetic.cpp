// SPDX-License-Identifier: Apache-2.0
#include <openti/core/error.hpp>
#include <openti/network/synthetic.hpp>

#include <cmath>
#include <numbers>
#include <random>

namespace openti::network
{

namespace
{

LonLat offset(LonLat origin, double east_m, double north_m)
{
    const double m_per_deg = kEarthRadiusMeters * std::numbers::pi / 180.0;
    return {origin.lon + east_m / (m_per_deg * std::cos(origin.lat * std::numbers::pi / 180.0)),
            origin.lat + north_m / m_per_deg};
}

struct Builder
{
    RoadNetwork net;
    std::int64_t next_link = 1;

    void node(std::int64_t id, LonLat p, Control c) { net.add_node({id, p.lon, p.lat, c}); }

    void two_way(std::int64_t a, std::int64_t b, int lanes, double speed)
    {
        const double len = haversine_m(net.node(a).pos(), net.node(b).pos());
        net.add_link({next_link++, a, b, len, lanes, speed, {Mode::drive}});
        net.add_link({next_link++, b, a, len, lanes, speed, {Mode::drive}});
    }
};

} // namespace

RoadNetwork make_grid_network(const GridSpec& spec)
{
    require(spec.rows >= 1 && spec.cols >= 1, "grid needs at least one row and column");
    require(spec.spacing_m > 0 && spec.arm_m > 0 && spec.free_speed > 0 && spec.lanes >= 1, "bad grid dimensions");
    Builder b;
    auto inter = [&](int r, int c) { return static_cast<std::int64_t>(1 + r * spec.cols + c); };
    for (int r = 0; r < spec.rows; ++r)
        for (int c = 0; c < spec.cols; ++c)
            b.node(inter(r, c), offset(spec.origin, c * spec.spacing_m, r * spec.spacing_m),
                   spec.signalized ? Control::signal : Control::none);
    std::int64_t terminal = 1001;
    auto arm = [&](int r, int c, double de, double dn) {
        const auto here = offset(spec.origin, c * spec.spacing_m, r * spec.spacing_m);
        b.node(terminal, offset(here, de, dn), Control::none);
        b.two_way(terminal, inter(r, c), spec.lanes, spec.free_speed);
        ++terminal;
    };
    for (int r = 0; r < spec.rows; ++r)
        for (int c = 0; c < spec.cols; ++c)
        {
            if (c + 1 < spec.cols)
                b.two_way(inter(r, c), inter(r, c + 1), spec.lanes, spec.free_speed);
            if (r + 1 < spec.rows)
                b.two_way(inter(r, c), inter(r + 1, c), spec.lanes, spec.free_speed);
        }
    for (int r = 0; r < spec.rows; ++r)
        for (int c = 0; c < spec.cols; ++c)
        {
            if (r == spec.rows - 1)
                arm(r, c, 0, spec.arm_m);
            if (r == 0)
                arm(r, c, 0, -spec.arm_m);
            if (c == spec.cols - 1)
                arm(r, c, spec.arm_m, 0);
            if (c == 0)
                arm(r, c, -spec.arm_m, 0);
        }
    b.net.build_signal_plans();
    return std::move(b.net);
}

RoadNetwork make_corridor(int segments, double segment_m, double free_speed, int lanes, LonLat origin)
{
    require(segments >= 1 && segment_m > 0, "corridor needs at least one positive-length segment");
    Builder b;
    for (int i = 0; i <= segments; ++i)
        b.node(i + 1, offset(origin, i * segment_m, 0), Control::none);
    for (int i = 1; i <= segments; ++i)
        b.two_way(i, i + 1, lanes, free_speed);
    return std::move(b.net);
}

RoadNetwork make_random_network(std::uint64_t seed, int max_rows, int max_cols)
{
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> rows_d(1, max_rows), cols_d(1, max_cols);
    std::uniform_real_distribution<double> len_d(150.0, 600.0), speed_d(8.0, 17.0);
    std::bernoulli_distribution keep(0.7), signal(0.8);
    const int rows = rows_d(rng), cols = cols_d(rng);

    Builder b;
    const LonLat origin {-111.94, 33.42};
    auto id = [&](int r, int c) { return static_cast<std::int64_t>(1 + r * cols + c); };
    std::vector<double> xs(cols), ys(rows);
    for (int c = 1; c < cols; ++c)
        xs[c] = xs[c - 1] + len_d(rng);
    for (int r = 1; r < rows; ++r)
        ys[r] = ys[r - 1] + len_d(rng);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            b.node(id(r, c), offset(origin, xs[c], ys[r]), signal(rng) ? Control::signal : Control::none);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
        {
            const double speed = speed_d(rng);
            // Row links are always kept and column links along the first
            // column, so the grid stays connected.
            if (c + 1 < cols)
                b.two_way(id(r, c), id(r, c + 1), 1 + static_cast<int>(rng() % 2), speed);
            if (r + 1 < rows && (c == 0 || keep(rng)))
                b.two_way(id(r, c), id(r + 1, c), 1 + static_cast<int>(rng() % 2), speed);
        }
    std::int64_t terminal = 1001;
    auto arm = [&](int r, int c, double de, double dn) {
        b.node(terminal, offset(offset(origin, xs[c], ys[r]), de, dn), Control::none);
        b.two_way(terminal, id(r, c), 1, speed_d(rng));
        ++terminal;
    };
    for (int r = 0; r < rows; ++r)
    {
        arm(r, 0, -len_d(rng), 0);
        arm(r, cols - 1, len_d(rng), 0);
    }
    for (int c = 0; c < cols; ++c)
    {
        arm(0, c, 0, -len_d(rng));
        arm(rows - 1, c, 0, len_d(rng));
    }
    b.net.build_signal_plans();
    return std::move(b.net);
}

} // namespace openti::network
