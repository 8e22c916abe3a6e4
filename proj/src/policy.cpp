#include "gridcharge/policy.hpp"

#include <cmath>
#include <map>

#include "gridcharge/csvio.hpp"
#include "gridcharge/errors.hpp"

namespace gridcharge::policy {

void validate(const ChargingPolicy& policy) {
    std::visit(
        [](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, HardFrequencyThreshold>) {
                if (!std::isfinite(p.threshold_hz) || p.threshold_hz <= 0.0)
                    throw ConfigError("hard threshold must be finite and > 0");
            } else if constexpr (std::is_same_v<T, FrequencyHysteresis>) {
                if (!(p.off_hz <= p.on_hz))
                    throw ConfigError("hysteresis requires off_hz <= on_hz");
            } else if constexpr (std::is_same_v<T, MinChargeSupervisor>) {
                if (!(p.min_charge > 0.0 && p.min_charge < 1.0))
                    throw ConfigError("min_charge must be in (0, 1)");
            } else if constexpr (std::is_same_v<T, DualChargeBand>) {
                if (!(0.0 < p.low_charge && p.low_charge < p.high_charge && p.high_charge < 1.0))
                    throw ConfigError("charge band requires 0 < low < high < 1");
            }
        },
        policy);
}

Decision decide(const ChargingPolicy& policy, ControllerState ctl, double frequency_hz,
                double charge) {
    if (!(charge >= 0.0 && charge <= 1.0)) throw ConfigError("charge out of [0, 1]");
    if (!std::isfinite(frequency_hz)) throw ConfigError("frequency must be finite");

    bool on = false;
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, HardFrequencyThreshold>) {
                on = frequency_hz >= p.threshold_hz;
            } else if constexpr (std::is_same_v<T, FrequencyHysteresis>) {
                if (frequency_hz >= p.on_hz)
                    on = true;
                else if (frequency_hz < p.off_hz)
                    on = false;
                else
                    on = ctl.last_decision;
            } else if constexpr (std::is_same_v<T, MinChargeSupervisor>) {
                on = charge < p.min_charge || frequency_hz >= p.threshold_hz;
            } else if constexpr (std::is_same_v<T, DualChargeBand>) {
                if (ctl.band_latch == BandLatch::ForceCharge && charge >= p.high_charge)
                    ctl.band_latch = BandLatch::None;
                if (charge < p.low_charge) ctl.band_latch = BandLatch::ForceCharge;
                on = ctl.band_latch == BandLatch::ForceCharge || frequency_hz >= p.threshold_hz;
            }
        },
        policy);

    ctl.last_decision = on;
    return {on, ctl};
}

namespace {

template <typename T>
std::size_t count_switches(std::span<const T> decisions) {
    std::size_t n = 0;
    for (std::size_t i = 1; i < decisions.size(); ++i)
        if (decisions[i] != decisions[i - 1]) ++n;
    return n;
}

} // namespace

std::size_t switch_count(std::span<const std::uint8_t> decisions) {
    return count_switches(decisions);
}
std::size_t switch_count(std::span<const bool> decisions) { return count_switches(decisions); }

namespace {

std::map<std::string, double> parse_kv(const std::string& body, const std::string& spec) {
    std::map<std::string, double> kv;
    for (auto field : csv::split(body)) {
        const auto eq = field.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("policy spec '" + spec + "': expected key=value pairs");
        double v;
        if (!csv::parse_double(field.substr(eq + 1), v))
            throw ConfigError("policy spec '" + spec + "': cannot parse value in '" +
                              std::string(field) + "'");
        kv[std::string(field.substr(0, eq))] = v;
    }
    return kv;
}

double take(std::map<std::string, double>& kv, const std::string& key, const std::string& spec) {
    auto it = kv.find(key);
    if (it == kv.end())
        throw ConfigError("policy spec '" + spec + "': missing key '" + key + "'");
    const double v = it->second;
    kv.erase(it);
    return v;
}

void expect_empty(const std::map<std::string, double>& kv, const std::string& spec) {
    if (!kv.empty())
        throw ConfigError("policy spec '" + spec + "': unknown key '" + kv.begin()->first + "'");
}

} // namespace

ChargingPolicy parse_policy(const std::string& spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos)
        throw ConfigError("policy spec '" + spec + "': expected '<kind>:<params>'");
    const std::string kind = spec.substr(0, colon);
    auto kv = parse_kv(spec.substr(colon + 1), spec);

    ChargingPolicy policy;
    if (kind == "hard") {
        policy = HardFrequencyThreshold{take(kv, "thr", spec)};
    } else if (kind == "hyst") {
        policy = FrequencyHysteresis{take(kv, "on", spec), take(kv, "off", spec)};
    } else if (kind == "minsoc") {
        policy = MinChargeSupervisor{take(kv, "thr", spec), take(kv, "min", spec)};
    } else if (kind == "band") {
        policy = DualChargeBand{take(kv, "thr", spec), take(kv, "low", spec),
                                take(kv, "high", spec)};
    } else {
        throw ConfigError("policy spec '" + spec + "': unknown kind '" + kind + "'");
    }
    expect_empty(kv, spec);
    validate(policy);
    return policy;
}

std::string format_policy(const ChargingPolicy& policy) {
    return std::visit(
        [](const auto& p) -> std::string {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, HardFrequencyThreshold>)
                return "hard:thr=" + csv::fmt(p.threshold_hz);
            else if constexpr (std::is_same_v<T, FrequencyHysteresis>)
                return "hyst:on=" + csv::fmt(p.on_hz) + ",off=" + csv::fmt(p.off_hz);
            else if constexpr (std::is_same_v<T, MinChargeSupervisor>)
                return "minsoc:thr=" + csv::fmt(p.threshold_hz) + ",min=" + csv::fmt(p.min_charge);
            else
                return "band:thr=" + csv::fmt(p.threshold_hz) + ",low=" + csv::fmt(p.low_charge) +
                       ",high=" + csv::fmt(p.high_charge);
        },
        policy);
}

} // namespace gridcharge::policy
