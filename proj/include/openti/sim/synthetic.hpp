// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <openti/sim/scenario.hpp>

#include <cstdint>

namespace openti::sim
{

/// One signalized 4-arm intersection (1 lane, 300 m arms). Zones are a 3x3
/// grid whose edge-middle cells hold the N, S, W and E terminals; demand is
/// `ns_vph` each way between N and S and `ew_vph` each way between W and E.
Scenario make_single_intersection_scenario(double ns_vph, double ew_vph, int hours = 1, std::uint64_t seed = 0,
                                           int decision_interval_s = 10);

/// The asymmetric-demand case used for controller comparisons: 450 veh/h
/// each way north-south, 120 veh/h each way east-west, one hour.
constexpr double kAsymmetricNsVph = 450.0;
constexpr double kAsymmetricEwVph = 120.0;
Scenario make_asymmetric_scenario(std::uint64_t seed = 0, int decision_interval_s = 10);

/// rows x cols signalized grid with gravity demand over a zone grid of
/// (rows + 2) x (cols + 2) cells.
Scenario make_grid_scenario(int rows, int cols, double total_vph, double beta = 1.0, int hours = 1,
                            std::uint64_t seed = 0, int decision_interval_s = 10);

/// Two-zone corridor (4 links of 400 m each way, 1x2 zones) observed on the
/// eastbound middle link and the westbound middle link. `hours` OD hours
/// starting at 7; every hour carries w2e and e2w trips.
Scenario make_corridor_scenario(double w2e_vph, double e2w_vph, int hours = 1, std::uint64_t seed = 0);

} // namespace openti::sim
