#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "gridcharge/signal.hpp"

namespace gridcharge::freqest {

// ---------------------------------------------------------------------------
// Differential dual-bandpass threshold detector
// ---------------------------------------------------------------------------

struct BandpassDetectorConfig {
    double threshold_hz = 50.0;
    double detune_hz = 0.1; ///< half-separation of the two bandpass centers
    std::pair<double, double> prefilter_band{45.0, 55.0};
    int filter_order = 6; ///< Butterworth, applied to all three bandpasses
    double envelope_lowpass_hz = 1.0;
    double final_lowpass_hz = 0.1;
    double sample_rate = 20000.0;
    double settle_time_s = 30.0; ///< samples before this are indeterminate
    /// Measured switching-point offset, set by calibrate_detector(). The
    /// detection filters are recentered by -offset so the effective
    /// switching frequency lands on threshold_hz.
    double calibration_offset_hz = 0.0;
};

void validate(const BandpassDetectorConfig& cfg);

enum class Decision : std::uint8_t { Off = 0, On = 1, Settling = 2 };

struct DetectionSeries {
    std::vector<Decision> decisions; ///< one per input sample
    std::size_t settled_from = 0;    ///< first index past the settling window
    double sample_rate = 0.0;

    /// Sample indices (>= settled_from) where the settled decision flips.
    std::vector<std::size_t> transitions() const;
};

/// Runs the full differential chain: prefilter, split into two detuned
/// bandpasses, full-wave rectification, envelope lowpass, branch
/// subtraction (low minus high), final lowpass, comparator. Output is On
/// where the difference is negative (frequency above threshold), Off where
/// positive; an exact zero retains the previous decision.
DetectionSeries detect_above_threshold(const signal::Waveform& w,
                                       const BandpassDetectorConfig& cfg);

/// Sweeps a clean synthetic chirp (span_hz wide, centered on the
/// threshold) through the detector and stores the measured switching
/// offset in the returned config, iterating until the residual is within
/// tolerance_hz. Deterministic.
BandpassDetectorConfig calibrate_detector(BandpassDetectorConfig cfg,
                                          double chirp_span_hz = 0.4,
                                          double chirp_duration_s = 120.0,
                                          double tolerance_hz = 0.002,
                                          int max_iterations = 4);

// ---------------------------------------------------------------------------
// Zero-crossing period estimator
// ---------------------------------------------------------------------------

struct ZeroCrossingConfig {
    int n_averages = 1;             ///< full periods averaged per estimate
    double hysteresis_volts = 0.0;  ///< Schmitt offset around the reference
    double timer_tick_s = 4e-6;     ///< crossing-timestamp quantum; 0 = off
    double dc_reference_volts = 2.5;
};

void validate(const ZeroCrossingConfig& cfg);

struct FrequencyEstimate {
    double time_s = 0.0;
    double frequency_hz = 0.0;
};

struct FrequencyEstimateSeries {
    std::vector<FrequencyEstimate> estimates;
    ZeroCrossingConfig config;
};

/// Schmitt-trigger level-crossing times of the waveform against the DC
/// reference: rising events when the signal exceeds reference+hysteresis
/// after having been below reference-hysteresis, falling events
/// symmetrically. Times are linearly interpolated between the bracketing
/// samples, then quantized to the timer tick when one is configured.
std::vector<double> crossing_times(const signal::Waveform& w, const ZeroCrossingConfig& cfg);

/// Frequency estimates over disjoint groups of n_averages full periods
/// (2*n_averages consecutive crossing intervals): N / group duration,
/// stamped at the group midpoint. Without averaging this yields one
/// estimate per full period.
FrequencyEstimateSeries estimate_frequency_zc(const signal::Waveform& w,
                                              const ZeroCrossingConfig& cfg);

void save_estimates(std::ostream& out, const FrequencyEstimateSeries& series);

// ---------------------------------------------------------------------------
// Resolution study
// ---------------------------------------------------------------------------

struct ResolutionCell {
    int n_averages = 1;
    double amplitude_vpp = 1.0;
    double std_hz = 0.0;
    std::size_t n_estimates = 0;
};

/// Sample standard deviation of the estimates on a fixed-frequency tone,
/// per (n_averages, amplitude) cell. One waveform is synthesized per
/// amplitude (seed derived per amplitude index) and shared by all
/// n_averages groupings of its crossing events.
std::vector<ResolutionCell> resolution_study(const signal::SynthSpec& spec,
                                             const ZeroCrossingConfig& cfg,
                                             std::span<const int> averages_list,
                                             std::span<const double> amplitudes_list,
                                             double tone_hz = 50.0,
                                             double sample_rate = 20000.0,
                                             std::size_t min_estimates = 200);

void save_resolution_table(std::ostream& out, std::span<const ResolutionCell> cells);

/// Additive noise level (volts) calibrated so the single-period estimator
/// on a clean 1 Vpp, 50 Hz tone at 20 kHz (no tick, no quantizer) shows a
/// standard deviation close to 2.5 mHz.
inline constexpr double kCalibratedNoiseSigmaVolts = 1.1e-4;

} // namespace gridcharge::freqest
