#include "gridcharge/fleet.hpp"

#include <cmath>

#include "gridcharge/csvio.hpp"
#include "gridcharge/errors.hpp"

namespace gridcharge::fleet {

void validate(const FleetScenario& s) {
    if (!(s.n_devices >= 0.0)) throw ConfigError("n_devices must be >= 0");
    if (!(s.avg_power_w >= 0.0)) throw ConfigError("avg_power_w must be >= 0");
    if (!(s.connected_fraction >= 0.0 && s.connected_fraction <= 1.0))
        throw ConfigError("connected_fraction must be in [0, 1]");
    if (!(s.charging_duty >= 0.0 && s.charging_duty <= 1.0))
        throw ConfigError("charging_duty must be in [0, 1]");
}

double aggregate_controllable_power_w(const FleetScenario& s) {
    validate(s);
    return s.n_devices * s.connected_fraction * s.charging_duty * s.avg_power_w;
}

double duty_from_sim(std::span<const sim::SimRecord> records) {
    if (records.empty()) throw InputError("duty_from_sim: empty record sequence");
    std::size_t on = 0;
    for (const auto& r : records)
        if (r.charging_enabled) ++on;
    return static_cast<double>(on) / static_cast<double>(records.size());
}

std::string format_power(double watts) {
    if (watts == 0.0) return "0 W";
    static constexpr const char* units[] = {"W", "kW", "MW", "GW", "TW"};
    int u = 0;
    double v = watts;
    while (std::fabs(v) >= 1000.0 && u < 4) {
        v /= 1000.0;
        ++u;
    }
    const double av = std::fabs(v);
    const int decimals = av < 10.0 ? 3 : (av < 100.0 ? 2 : 1);
    return csv::fmt_fixed(v, decimals) + " " + units[u];
}

} // namespace gridcharge::fleet
