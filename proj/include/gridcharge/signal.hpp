#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "gridcharge/kernels.hpp"

namespace gridcharge::signal {

/// Uniformly sampled voltage signal.
struct Waveform {
    std::vector<double> samples;
    double sample_rate = 0.0; ///< samples per second

    double duration_s() const {
        return sample_rate > 0.0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
    }
};

struct TracePoint {
    double time_s = 0.0;
    double frequency_hz = 0.0;
};

/// Timestamped grid-frequency series. Times strictly increasing.
struct FrequencyTrace {
    std::vector<TracePoint> points;

    bool empty() const { return points.empty(); }
    double start_time_s() const { return points.front().time_s; }
    double end_time_s() const { return points.back().time_s; }
    double duration_s() const { return end_time_s() - start_time_s(); }

    /// Piecewise-linear interpolation; clamps outside the covered span.
    double frequency_at(double time_s) const;
};

/// Validity bounds for trace ingestion (grid data sanity window).
struct TraceBounds {
    double min_hz = 40.0;
    double max_hz = 60.0;
};

/// Parameters shared by all waveform synthesis operations.
struct SynthSpec {
    double amplitude_vpp = 1.0;  ///< fundamental peak-to-peak, volts
    double dc_offset = 0.0;      ///< volts
    double noise_sigma = 0.0;    ///< additive white Gaussian std dev, volts
    std::vector<double> harmonic_levels; ///< [k] = level of harmonic k+2 relative to fundamental
    std::optional<int> quantizer_bits;   ///< 1..32 when present
    double quantizer_range = 5.0;        ///< volts full scale
    std::uint64_t rng_seed = 0;
};

/// Throws ConfigError if the spec violates its invariants.
void validate(const SynthSpec& spec);

/// Throws InputError if the waveform carries non-finite samples or a
/// non-positive sample rate.
void validate(const Waveform& w);

/// Throws InputError if times are not strictly increasing or frequencies
/// fall outside `bounds`.
void validate(const FrequencyTrace& trace, const TraceBounds& bounds = {});

using kernels::Exec;

/// Sampled sine at `frequency` with the spec's amplitude, offset, harmonics,
/// noise and optional quantization. Sample count = round(duration * rate).
/// Refuses fundamental or harmonic frequencies at/above Nyquist.
Waveform synth_tone(double frequency_hz, double duration_s, double sample_rate,
                    const SynthSpec& spec, Exec exec = Exec::Parallel);

/// Phase-continuous FM render of a frequency trace (piecewise-linear
/// interpolation between trace points).
Waveform synth_from_trace(const FrequencyTrace& trace, double sample_rate,
                          const SynthSpec& spec, Exec exec = Exec::Parallel);

/// Uniform mid-rise quantizer over [0, full_scale]; out-of-range samples
/// clamp to the first/last level.
Waveform quantize(const Waveform& w, int bits, double full_scale,
                  Exec exec = Exec::Parallel);

/// Reads the CSV trace format (header `time_s,frequency_hz`). Errors name
/// the offending 1-based line.
FrequencyTrace load_trace(std::istream& in, const TraceBounds& bounds = {});
FrequencyTrace load_trace_file(const std::string& path, const TraceBounds& bounds = {});

void save_trace(std::ostream& out, const FrequencyTrace& trace);

/// Waveform CSV (`time_s,volts`); loading infers the sample rate from the
/// time column and requires uniform spacing.
void save_waveform(std::ostream& out, const Waveform& w);
Waveform load_waveform(std::istream& in);
Waveform load_waveform_file(const std::string& path);

} // namespace gridcharge::signal
