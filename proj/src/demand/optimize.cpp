// SPDX-License-Identifier: Apache-2.0
#include <openti/core/error.hpp>
#include <openti/core/text.hpp>
#include <openti/demand/optimize.hpp>
#include <openti/kernels/kernels.hpp>
#include <openti/sim/simulator.hpp>
#include <openti/tsc/policy.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace openti::demand
{

void GaParams::validate() const
{
    require(population >= 2, "GA population must be at least 2");
    require(generations >= 0, "GA generations must be non-negative");
    require(tournament_k >= 1, "tournament size must be at least 1");
    require(crossover_rate >= 0.0 && crossover_rate <= 1.0, "crossover rate must lie in [0, 1]");
    require(mutation_sigma_frac >= 0.0 && mutation_sigma_frac <= 1.0, "mutation sigma fraction must lie in [0, 1]");
    require(mutation_sigma_floor >= 0.0, "mutation sigma floor must be non-negative");
    require(elitism >= 0 && elitism < population, "elitism must be below the population size");
    require(threads >= 1, "threads must be at least 1");
}

namespace
{

ControllerFactory or_default(ControllerFactory f)
{
    if (f)
        return f;
    return [] { return std::make_unique<tsc::FixedTimeController>(30); };
}

struct Cell
{
    int o, d;
    std::size_t h;
};

std::vector<Cell> off_diagonal(const ODMatrix& od)
{
    std::vector<Cell> cells;
    for (int o = 0; o < od.zones(); ++o)
        for (int d = 0; d < od.zones(); ++d)
            if (o != d)
                for (std::size_t h = 0; h < od.hour_count(); ++h)
                    cells.push_back({o, d, h});
    return cells;
}

// Flattened observation vector in series order, with a lookup for the simulated side.
struct Target
{
    std::vector<std::pair<std::int64_t, int>> keys; // (link, hour)
    std::vector<double> observed;
};

Target make_target(const std::vector<ObservationSeries>& obs, const sim::Scenario& s)
{
    require(!obs.empty(), "no observation series given");
    std::set<int> hours(s.od.hours().begin(), s.od.hours().end());
    Target t;
    for (const auto& series: obs)
    {
        require(s.network.find_link(series.link_id) != nullptr,
                "observation link " + std::to_string(series.link_id) + " is not in the scenario network");
        require(series.hours.size() == series.counts.size(), "observation hours and counts differ in length");
        for (std::size_t i = 0; i < series.hours.size(); ++i)
        {
            require(hours.count(series.hours[i]) > 0,
                    "observation hour " + std::to_string(series.hours[i]) + " is not an OD hour");
            t.keys.push_back({series.link_id, series.hours[i]});
            t.observed.push_back(series.counts[i]);
        }
    }
    return t;
}

sim::Scenario observing(const sim::Scenario& base, const std::vector<std::int64_t>& links)
{
    auto s = base;
    s.observed_links = links;
    std::sort(s.observed_links.begin(), s.observed_links.end());
    s.observed_links.erase(std::unique(s.observed_links.begin(), s.observed_links.end()), s.observed_links.end());
    return s;
}

std::vector<double> simulate(sim::Scenario& work, const ODMatrix& od, const Target& t, const ControllerFactory& make)
{
    sim::set_demand(work, od);
    auto controller = make();
    const auto m = sim::run(work, *controller).second;
    std::vector<double> out;
    out.reserve(t.keys.size());
    for (const auto& [link, hour]: t.keys)
    {
        auto l = m.per_link_counts.find(link);
        int v = 0;
        if (l != m.per_link_counts.end())
        {
            auto h = l->second.find(hour);
            if (h != l->second.end())
                v = h->second;
        }
        out.push_back(v);
    }
    return out;
}

double rmse(const std::vector<double>& sim, const std::vector<double>& obs)
{
    return std::sqrt(kernels::sum_sq_diff(sim, obs) / static_cast<double>(obs.size()));
}

ODMatrix decode(const ODMatrix& seed, const std::vector<Cell>& cells, const std::vector<double>& genes)
{
    ODMatrix od = seed;
    for (std::size_t i = 0; i < cells.size(); ++i)
        od.at(cells[i].o, cells[i].d, cells[i].h) = genes[i];
    return od;
}

std::vector<std::int64_t> links_of(const std::vector<ObservationSeries>& obs)
{
    std::vector<std::int64_t> links;
    for (const auto& s: obs)
        links.push_back(s.link_id);
    return links;
}

} // namespace

double count_rmse(const ODMatrix& od, const std::vector<ObservationSeries>& observations,
                  const sim::Scenario& scenario, ControllerFactory controller)
{
    const auto t = make_target(observations, scenario);
    auto work = observing(scenario, links_of(observations));
    return rmse(simulate(work, od, t, or_default(std::move(controller))), t.observed);
}

std::vector<ObservationSeries> simulate_counts(const ODMatrix& od, const std::vector<std::int64_t>& links,
                                               const sim::Scenario& scenario, ControllerFactory controller)
{
    auto work = observing(scenario, links);
    sim::set_demand(work, od);
    auto c = or_default(std::move(controller))();
    const auto m = sim::run(work, *c).second;
    std::vector<ObservationSeries> out;
    for (auto link: links)
    {
        ObservationSeries s;
        s.link_id = link;
        for (int h: od.hours())
        {
            s.hours.push_back(h);
            int v = 0;
            if (auto row = m.per_link_counts.find(link); row != m.per_link_counts.end())
                if (auto it = row->second.find(h); it != row->second.end())
                    v = it->second;
            s.counts.push_back(v);
        }
        out.push_back(std::move(s));
    }
    return out;
}

CalibrationResult optimize_demand(const ODMatrix& seed_od, const std::vector<ObservationSeries>& observations,
                                  const sim::Scenario& scenario, const GaParams& ga, ControllerFactory controller,
                                  const std::function<void(int, const std::vector<std::vector<double>>&)>& on_generation)
{
    ga.validate();
    seed_od.validate();
    require(seed_od.zones() == static_cast<int>(scenario.zone_nodes.size()) && seed_od.hours() == scenario.od.hours(),
            "seed OD must match the scenario zones and hours");
    const auto make = or_default(std::move(controller));
    const auto target = make_target(observations, scenario);
    const auto cells = off_diagonal(seed_od);
    require(!cells.empty(), "calibration needs at least two zones");

    const int threads = std::max(1, std::min(ga.threads, ga.population));
    std::vector<sim::Scenario> work(static_cast<std::size_t>(threads), observing(scenario, links_of(observations)));

    std::mt19937_64 rng(ga.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<double> seed_genes;
    for (const auto& c: cells)
        seed_genes.push_back(seed_od.at(c.o, c.d, c.h));
    double mean_gene = kernels::sum(seed_genes) / static_cast<double>(seed_genes.size());
    if (mean_gene <= 0.0)
        mean_gene = 1.0;

    std::vector<std::vector<double>> pop;
    pop.push_back(seed_genes);
    while (static_cast<int>(pop.size()) < ga.population)
    {
        std::vector<double> g(cells.size());
        for (std::size_t i = 0; i < g.size(); ++i)
            g[i] = unit(rng) * 2.0 * std::max(seed_genes[i], mean_gene);
        pop.push_back(std::move(g));
    }

    std::vector<double> fitness(pop.size());
    auto evaluate = [&](int generation) {
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
        auto worker = [&](int w) {
            try
            {
                for (std::size_t i = static_cast<std::size_t>(w); i < pop.size(); i += static_cast<std::size_t>(threads))
                    fitness[i] = rmse(simulate(work[static_cast<std::size_t>(w)], decode(seed_od, cells, pop[i]),
                                               target, make),
                                      target.observed);
            }
            catch (...)
            {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        };
        if (threads == 1)
            worker(0);
        else
        {
            std::vector<std::thread> pool;
            for (int w = 0; w < threads; ++w)
                pool.emplace_back(worker, w);
            for (auto& t: pool)
                t.join();
        }
        for (auto& e: errors)
            if (e)
            {
                try
                {
                    std::rethrow_exception(e);
                }
                catch (const std::exception& ex)
                {
                    fail(Errc::SimFailure, "simulation failed in generation " + std::to_string(generation) + ": " + ex.what(),
                         {std::to_string(generation)});
                }
            }
    };
    auto ranked = [&] {
        std::vector<std::size_t> idx(pop.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fitness[a] < fitness[b]; });
        return idx;
    };

    CalibrationResult out;
    auto record = [&](int generation) {
        const auto idx = ranked();
        out.history.push_back({generation, fitness[idx.front()],
                               kernels::sum(fitness) / static_cast<double>(fitness.size())});
        if (on_generation)
            on_generation(generation, pop);
    };

    evaluate(0);
    record(0);
    std::uniform_int_distribution<std::size_t> pick(0, pop.size() - 1);
    auto tournament = [&]() -> const std::vector<double>& {
        std::size_t best = pick(rng);
        for (int k = 1; k < ga.tournament_k; ++k)
        {
            const auto c = pick(rng);
            if (fitness[c] < fitness[best] || (fitness[c] == fitness[best] && c < best))
                best = c;
        }
        return pop[best];
    };

    for (int g = 1; g <= ga.generations; ++g)
    {
        const auto idx = ranked();
        std::vector<std::vector<double>> next;
        for (int e = 0; e < ga.elitism; ++e)
            next.push_back(pop[idx[static_cast<std::size_t>(e)]]);
        std::vector<double> noise(cells.size());
        while (static_cast<int>(next.size()) < ga.population)
        {
            const auto& a = tournament();
            const auto& b = tournament();
            std::vector<double> child(cells.size());
            for (std::size_t i = 0; i < child.size(); ++i)
                child[i] = unit(rng) < ga.crossover_rate ? b[i] : a[i];
            for (auto& z: noise)
                z = gauss(rng);
            kernels::mutate_gaussian(child, noise, ga.mutation_sigma_frac, ga.mutation_sigma_floor);
            next.push_back(std::move(child));
        }
        // Elites keep their fitness; only offspring are simulated.
        std::vector<double> elite_fit;
        for (int e = 0; e < ga.elitism; ++e)
            elite_fit.push_back(fitness[idx[static_cast<std::size_t>(e)]]);
        pop = std::move(next);
        evaluate(g);
        for (int e = 0; e < ga.elitism; ++e)
            fitness[static_cast<std::size_t>(e)] = elite_fit[static_cast<std::size_t>(e)];
        record(g);
    }

    const auto idx = ranked();
    out.best = decode(seed_od, cells, pop[idx.front()]);
    out.best_rmse = fitness[idx.front()];
    const auto sim_counts = simulate(work.front(), out.best, target, make);
    for (std::size_t i = 0; i < target.keys.size(); ++i)
        out.residuals.push_back({target.keys[i].first, target.keys[i].second, static_cast<int>(target.observed[i]),
                                 static_cast<int>(sim_counts[i])});
    return out;
}

void write_ga_history(const std::vector<GenerationStats>& history, const std::filesystem::path& path)
{
    std::ostringstream o;
    o << "generation,best_rmse,mean_rmse\n";
    for (const auto& h: history)
        o << h.generation << ',' << format_fixed(h.best_rmse, 6) << ',' << format_fixed(h.mean_rmse, 6) << '\n';
    write_file(path.string(), o.str());
}

void write_residuals(const std::vector<Residual>& residuals, const std::filesystem::path& path)
{
    std::ostringstream o;
    o << "link_id,hour,observed,simulated,residual\n";
    for (const auto& r: residuals)
        o << r.link_id << ',' << r.hour << ',' << r.observed << ',' << r.simulated << ',' << r.simulated - r.observed
          << '\n';
    write_file(path.string(), o.str());
}

} // namespace openti::demand
