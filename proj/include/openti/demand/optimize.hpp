// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <openti/demand/demand.hpp>
#include <openti/sim/controller.hpp>
#include <openti/sim/scenario.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <vector>

namespace openti::demand
{

struct GaParams
{
    int population = 50;
    int generations = 100;
    int tournament_k = 3;
    double crossover_rate = 0.5; // per-gene swap probability (uniform crossover)
    double mutation_sigma_frac = 0.10;
    double mutation_sigma_floor = 1.0;
    int elitism = 2;
    std::uint64_t seed = 0;
    int threads = 1; // fitness evaluations per generation

    /// Throws InvalidArgument.
    void validate() const;
};

struct GenerationStats
{
    int generation = 0;
    double best_rmse = 0.0;
    double mean_rmse = 0.0;
};

struct Residual
{
    std::int64_t link_id = 0;
    int hour = 0;
    int observed = 0;
    int simulated = 0;
};

struct CalibrationResult
{
    ODMatrix best;
    double best_rmse = 0.0;
    std::vector<GenerationStats> history; // generation 0 is the initial population
    std::vector<Residual> residuals;      // best individual, per observed link and hour
};

using ControllerFactory = std::function<std::unique_ptr<sim::SignalController>()>;

/// Off-diagonal OD cells form the chromosome; fitness is the RMSE between
/// simulated and observed hourly link counts with the scenario seed held
/// fixed. Tournament selection, uniform crossover, Gaussian mutation with
/// sigma = max(frac * gene, floor) clamped at zero, and elitism.
///
/// `controller` defaults to 30-s fixed-time signals. `on_generation` sees
/// every generation's population after evaluation (tests, progress).
/// Throws InvalidArgument (observations not in the scenario) and SimFailure
/// (details: generation index).
CalibrationResult optimize_demand(
    const ODMatrix& seed_od, const std::vector<ObservationSeries>& observations, const sim::Scenario& scenario,
    const GaParams& ga, ControllerFactory controller = {},
    const std::function<void(int, const std::vector<std::vector<double>>&)>& on_generation = {});

/// RMSE of one OD matrix against the observations (same simulation as the GA).
double count_rmse(const ODMatrix& od, const std::vector<ObservationSeries>& observations,
                  const sim::Scenario& scenario, ControllerFactory controller = {});

/// Hourly counts on `links` from one simulation of `od` (ground-truth helper).
std::vector<ObservationSeries> simulate_counts(const ODMatrix& od, const std::vector<std::int64_t>& links,
                                               const sim::Scenario& scenario, ControllerFactory controller = {});

/// `generation,best_rmse,mean_rmse`
void write_ga_history(const std::vector<GenerationStats>& history, const std::filesystem::path& path);
/// `link_id,hour,observed,simulated,residual`
void write_residuals(const std::vector<Residual>& residuals, const std::filesystem::path& path);

} // namespace openti::demand
