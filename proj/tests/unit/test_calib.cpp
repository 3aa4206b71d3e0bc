// SPDX-License-Identifier: Apache-2.0
#include "support.hpp"

#include <doctest.h>

#include <openti/core/error.hpp>
#include <openti/core/text.hpp>
#include <openti/demand/optimize.hpp>
#include <openti/sim/synthetic.hpp>

#include <cmath>
#include <limits>

using namespace openti;
using namespace openti::demand;
using openti::test::TempDir;

namespace
{

double mean_count(const std::vector<ObservationSeries>& obs)
{
    double s = 0.0;
    int n = 0;
    for (const auto& o: obs)
        for (int c: o.counts)
        {
            s += c;
            ++n;
        }
    return s / n;
}

ODMatrix flat(const ODMatrix& shape, double w2e, double e2w)
{
    ODMatrix od = shape;
    for (std::size_t h = 0; h < od.hour_count(); ++h)
    {
        od.at(0, 1, h) = w2e;
        od.at(1, 0, h) = e2w;
    }
    return od;
}

} // namespace

TEST_CASE("ga recovers corridor demand close to the exhaustive grid optimum")
{
    const auto truth = sim::make_corridor_scenario(30, 20, 1, 0);
    const auto observed = simulate_counts(truth.od, {3, 4}, truth);
    REQUIRE(observed.size() == 2);
    CHECK(observed[0].counts[0] == 30);
    CHECK(observed[1].counts[0] == 20);

    const auto seed_od = flat(truth.od, 10, 10);
    GaParams ga;
    ga.population = 24;
    ga.generations = 40;
    ga.seed = 7;
    const auto res = optimize_demand(seed_od, observed, truth, ga);

    double grid_best = std::numeric_limits<double>::infinity();
    for (int a = 0; a <= 60; a += 5)
        for (int b = 0; b <= 60; b += 5)
            grid_best = std::min(grid_best, count_rmse(flat(truth.od, a, b), observed, truth));

    const double mean = mean_count(observed);
    CHECK(res.best_rmse <= 0.10 * mean);
    CHECK(res.best_rmse <= grid_best + 0.05 * mean);
    CHECK(count_rmse(res.best, observed, truth) == doctest::Approx(res.best_rmse));

    REQUIRE(res.history.size() == 41);
    CHECK(res.history.front().generation == 0);
    for (std::size_t g = 1; g < res.history.size(); ++g)
        CHECK(res.history[g].best_rmse <= res.history[g - 1].best_rmse);
    CHECK(res.history.back().best_rmse == doctest::Approx(res.best_rmse));

    REQUIRE(res.residuals.size() == 2);
    for (const auto& r: res.residuals)
        CHECK(std::abs(r.simulated - r.observed) <= 0.10 * mean);
}

TEST_CASE("ga keeps every gene non-negative and the output shape fixed")
{
    auto truth = sim::make_corridor_scenario(12, 8, 16, 0);
    const auto observed = simulate_counts(truth.od, {3, 4}, truth);
    const auto seed_od = flat(truth.od, 0.5, 0.5);
    GaParams ga;
    ga.population = 8;
    ga.generations = 3;
    ga.mutation_sigma_frac = 1.0;
    ga.mutation_sigma_floor = 50.0;
    int calls = 0;
    bool nonneg = true;
    const auto res = optimize_demand(seed_od, observed, truth, ga, {}, [&](int, const auto& pop) {
        ++calls;
        for (const auto& g: pop)
            for (double x: g)
                nonneg = nonneg && x >= 0.0 && std::isfinite(x);
    });
    CHECK(calls == 4);
    CHECK(nonneg);
    CHECK(res.best.zones() == 2);
    CHECK(res.best.hour_count() == 16);
    CHECK(res.best.hours() == truth.od.hours());
    CHECK_NOTHROW(res.best.validate());
    CHECK(res.residuals.size() == 32);

    TempDir dir;
    write_ga_history(res.history, dir.path() / "ga_history.csv");
    write_residuals(res.residuals, dir.path() / "residuals.csv");
    const auto hist = split(trim(read_file((dir.path() / "ga_history.csv").string())), '\n');
    CHECK(hist.front() == "generation,best_rmse,mean_rmse");
    CHECK(hist.size() == 5);
    const auto resid = split(trim(read_file((dir.path() / "residuals.csv").string())), '\n');
    CHECK(resid.front() == "link_id,hour,observed,simulated,residual");
    CHECK(resid.size() == 33);
}

TEST_CASE("ga is deterministic for a fixed seed and rejects bad inputs")
{
    const auto truth = sim::make_corridor_scenario(20, 10, 1, 0);
    const auto observed = simulate_counts(truth.od, {3, 4}, truth);
    GaParams ga;
    ga.population = 6;
    ga.generations = 4;
    ga.seed = 3;
    const auto a = optimize_demand(flat(truth.od, 5, 5), observed, truth, ga);
    ga.threads = 3;
    const auto b = optimize_demand(flat(truth.od, 5, 5), observed, truth, ga);
    CHECK(a.best == b.best);
    CHECK(a.best_rmse == b.best_rmse);

    auto bad = observed;
    bad[0].link_id = 999;
    CHECK_THROWS_AS(optimize_demand(flat(truth.od, 5, 5), bad, truth, ga), Error);
    bad = observed;
    bad[0].hours = {3};
    CHECK_THROWS_AS(optimize_demand(flat(truth.od, 5, 5), bad, truth, ga), Error);
    GaParams tiny = ga;
    tiny.elitism = tiny.population;
    CHECK_THROWS_AS(optimize_demand(flat(truth.od, 5, 5), observed, truth, tiny), Error);
}

TEST_CASE("ga reports simulator failures with the generation index")
{
    GaParams ga;
    ga.population = 4;
    ga.generations = 1;
    auto broken = [] {
        return std::make_unique<sim::FunctionController>(
            [](const sim::TscObservation&, const network::SignalizedIntersection&) -> sim::TscAction { throw std::runtime_error("boom"); }, "broken");
    };
    // The corridor has no signals, so swap in a one-intersection scenario to reach the controller.
    const auto single = sim::make_single_intersection_scenario(100, 100);
    std::vector<ObservationSeries> obs = simulate_counts(single.od, {single.network.links().front().id}, single);
    try
    {
        optimize_demand(single.od, obs, single, ga, broken);
        FAIL("expected SimFailure");
    }
    catch (const Error& e)
    {
        CHECK(e.code() == Errc::SimFailure);
        REQUIRE(!e.details().empty());
        CHECK(e.details().front() == "0");
    }
}
