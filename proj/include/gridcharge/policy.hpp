#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>

namespace gridcharge::policy {

/// Charge whenever the grid frequency is at or above the threshold.
struct HardFrequencyThreshold {
    double threshold_hz = 50.0;
};

/// Debounced threshold: switch on at on_hz, off below off_hz, retain the
/// last decision inside the band.
struct FrequencyHysteresis {
    double on_hz = 50.01;
    double off_hz = 49.99;
};

/// Frequency threshold with a guaranteed minimum charge: below min_charge
/// the battery charges regardless of the grid frequency.
struct MinChargeSupervisor {
    double threshold_hz = 50.0;
    double min_charge = 0.75;
};

/// Two-threshold charge band: dropping below low_charge latches forced
/// charging until high_charge is reached, then frequency control resumes.
struct DualChargeBand {
    double threshold_hz = 50.0;
    double low_charge = 0.75;
    double high_charge = 0.80;
};

using ChargingPolicy =
    std::variant<HardFrequencyThreshold, FrequencyHysteresis, MinChargeSupervisor, DualChargeBand>;

void validate(const ChargingPolicy& policy);

enum class BandLatch : std::uint8_t { None, ForceCharge };

/// Latched controller memory. A freshly connected device starts with the
/// charging decision on and no band latch.
struct ControllerState {
    bool last_decision = true;
    BandLatch band_latch = BandLatch::None;
};

struct Decision {
    bool charging_enabled = false;
    ControllerState next;
};

/// Pure transition function; all memory lives in the controller state.
Decision decide(const ChargingPolicy& policy, ControllerState ctl, double frequency_hz,
                double charge);

/// Number of adjacent unequal pairs in a decision sequence.
std::size_t switch_count(std::span<const std::uint8_t> decisions);
std::size_t switch_count(std::span<const bool> decisions);

/// Parses CLI policy specs: `hard:thr=50.0`, `hyst:on=50.01,off=49.99`,
/// `minsoc:thr=50.0,min=0.75`, `band:thr=50.0,low=0.75,high=0.80`.
ChargingPolicy parse_policy(const std::string& spec);
std::string format_policy(const ChargingPolicy& policy);

} // namespace gridcharge::policy
