#pragma once

#include <iosfwd>
#include <optional>
#include <string>

namespace gridcharge::battery {

/// Linear charge/discharge rates in percentage points per second.
struct BatteryModel {
    double rate_charge_pp_s = 0.0;
    double rate_discharge_pp_s = 0.0;
    std::string name;
};

enum class Mode { Charging, Discharging, Trickle };

struct BatteryState {
    double charge = 1.0; ///< fraction in [0, 1]
    Mode mode = Mode::Charging;
};

void validate(const BatteryModel& model);

/// Advances the state by dt seconds. Charging ramps linearly to full and
/// then trickles; otherwise the device runs on the battery and discharges
/// at the model rate. Device load is constant in both cases.
BatteryState step(const BatteryState& state, const BatteryModel& model, bool charging_enabled,
                  double dt_s);

/// Seconds from full charge to a flat battery during normal operation.
double battery_life_s(const BatteryModel& model);

/// Ratio of the charge rate to the discharge rate.
double charge_ratio(const BatteryModel& model);

/// Built-in presets: "laptop1" (Dell E5520) and "laptop2" (MacBook Pro).
std::optional<BatteryModel> preset(const std::string& name);
BatteryModel laptop1();
BatteryModel laptop2();

/// Loads a model from `key=value` lines: rate_charge, rate_discharge and
/// an optional name.
BatteryModel load_model(std::istream& in);
BatteryModel load_model_file(const std::string& path);

/// Resolves a CLI-style model reference: a preset name or a file path.
BatteryModel resolve_model(const std::string& name_or_path);

const char* mode_name(Mode m);

} // namespace gridcharge::battery
