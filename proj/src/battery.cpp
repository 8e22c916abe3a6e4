#include "gridcharge/battery.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>

#include "gridcharge/csvio.hpp"
#include "gridcharge/errors.hpp"

namespace gridcharge::battery {

void validate(const BatteryModel& model) {
    if (!(model.rate_charge_pp_s > 0.0) || !std::isfinite(model.rate_charge_pp_s))
        throw ConfigError("rate_charge must be > 0");
    if (!(model.rate_discharge_pp_s > 0.0) || !std::isfinite(model.rate_discharge_pp_s))
        throw ConfigError("rate_discharge must be > 0");
}

BatteryState step(const BatteryState& state, const BatteryModel& model, bool charging_enabled,
                  double dt_s) {
    if (!(dt_s > 0.0)) throw ConfigError("dt must be > 0");
    if (!(state.charge >= 0.0 && state.charge <= 1.0))
        throw ConfigError("battery charge out of [0, 1]");

    BatteryState next;
    if (charging_enabled) {
        next.charge = std::min(1.0, state.charge + dt_s * model.rate_charge_pp_s / 100.0);
        next.mode = (next.charge >= 1.0) ? Mode::Trickle : Mode::Charging;
    } else {
        next.charge = std::max(0.0, state.charge - dt_s * model.rate_discharge_pp_s / 100.0);
        next.mode = Mode::Discharging;
    }
    return next;
}

double battery_life_s(const BatteryModel& model) {
    validate(model);
    return 100.0 / model.rate_discharge_pp_s;
}

double charge_ratio(const BatteryModel& model) {
    validate(model);
    return model.rate_charge_pp_s / model.rate_discharge_pp_s;
}

BatteryModel laptop1() { return {0.0213, 0.0115, "laptop1"}; }
BatteryModel laptop2() { return {0.0128, 0.0056, "laptop2"}; }

std::optional<BatteryModel> preset(const std::string& name) {
    if (name == "laptop1") return laptop1();
    if (name == "laptop2") return laptop2();
    return std::nullopt;
}

BatteryModel load_model(std::istream& in) {
    BatteryModel model;
    model.name = "custom";
    bool have_charge = false, have_discharge = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto sv = csv::strip_cr(line);
        if (sv.empty() || sv.front() == '#') continue;
        const auto eq = sv.find('=');
        if (eq == std::string_view::npos)
            throw InputError("model line " + std::to_string(line_no) + ": expected key=value");
        const auto key = sv.substr(0, eq);
        const auto value = sv.substr(eq + 1);
        if (key == "rate_charge") {
            if (!csv::parse_double(value, model.rate_charge_pp_s))
                throw InputError("model line " + std::to_string(line_no) + ": bad rate_charge");
            have_charge = true;
        } else if (key == "rate_discharge") {
            if (!csv::parse_double(value, model.rate_discharge_pp_s))
                throw InputError("model line " + std::to_string(line_no) + ": bad rate_discharge");
            have_discharge = true;
        } else if (key == "name") {
            model.name = std::string(value);
        } else {
            throw InputError("model line " + std::to_string(line_no) + ": unknown key '" +
                             std::string(key) + "'");
        }
    }
    if (!have_charge || !have_discharge)
        throw InputError("model file must define rate_charge and rate_discharge");
    validate(model);
    return model;
}

BatteryModel load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open model file '" + path + "'");
    return load_model(in);
}

BatteryModel resolve_model(const std::string& name_or_path) {
    if (auto m = preset(name_or_path)) return *m;
    return load_model_file(name_or_path);
}

const char* mode_name(Mode m) {
    switch (m) {
        case Mode::Charging: return "charging";
        case Mode::Discharging: return "discharging";
        case Mode::Trickle: return "trickle";
    }
    return "unknown";
}

} // namespace gridcharge::battery
