#pragma once

#include <cstdint>
#include <span>

namespace gridcharge::kernels {

/// Execution mode for the data-parallel kernels. Serial is the reference
/// implementation; Parallel runs the same per-element body under OpenMP.
/// Both produce bit-identical output (per-element work is a pure function
/// of the element index).
enum class Exec { Serial, Parallel };

struct ToneParams {
    double frequency_hz = 50.0;
    double sample_rate = 20000.0;
    double amplitude_vpp = 1.0;
    double dc_offset = 0.0;
    double noise_sigma = 0.0;
    std::span<const double> harmonic_levels; ///< [k] = level of harmonic k+2, relative to fundamental
    std::uint64_t rng_seed = 0;
};

/// Fills `out` with a sampled tone: fundamental + optional harmonics + DC
/// offset + seeded white Gaussian noise.
void render_tone(std::span<double> out, const ToneParams& p, Exec exec);

/// Frequency-modulated render over a piecewise-linear frequency profile.
/// Knot arrays describe the profile; knot_phase carries the accumulated
/// phase at each knot so samples can be evaluated independently.
struct FmParams {
    std::span<const double> knot_time_s;
    std::span<const double> knot_freq_hz;
    std::span<const double> knot_phase_rad;
    double start_time_s = 0.0;
    double sample_rate = 20000.0;
    double amplitude_vpp = 1.0;
    double dc_offset = 0.0;
    double noise_sigma = 0.0;
    std::span<const double> harmonic_levels;
    std::uint64_t rng_seed = 0;
};

void render_fm(std::span<double> out, const FmParams& p, Exec exec);

/// Uniform mid-rise quantizer over [0, full_scale] with clamping.
void quantize_midrise(std::span<double> inout, int bits, double full_scale, Exec exec);

/// In-place full-wave rectification.
void rectify_abs(std::span<double> inout, Exec exec);

/// out[i] = a[i] - b[i]
void subtract(std::span<const double> a, std::span<const double> b,
              std::span<double> out, Exec exec);

} // namespace gridcharge::kernels
