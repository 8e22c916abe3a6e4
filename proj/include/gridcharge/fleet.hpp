#pragma once

#include <span>
#include <string>

#include "gridcharge/sim.hpp"

namespace gridcharge::fleet {

/// Aggregate controllable-load scenario.
struct FleetScenario {
    double n_devices = 0.0;        ///< devices owned
    double avg_power_w = 50.0;     ///< watts per charging device
    double connected_fraction = 1.0;
    double charging_duty = 1.0;    ///< fraction of connected devices drawing charge
};

void validate(const FleetScenario& s);

/// n_devices * connected_fraction * charging_duty * avg_power_w
double aggregate_controllable_power_w(const FleetScenario& s);

/// Fraction of simulation steps with charging enabled; refines the duty
/// parameter from a representative single-device run.
double duty_from_sim(std::span<const sim::SimRecord> records);

/// Engineering-unit formatting, e.g. "1.000 GW", "18.00 MW".
std::string format_power(double watts);

} // namespace gridcharge::fleet
