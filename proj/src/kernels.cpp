#include "gridcharge/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gridcharge/rng.hpp"

namespace gridcharge::kernels {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <typename Body>
void for_each_index(std::int64_t n, Exec exec, const Body& body) {
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < n; ++i) body(i);
    } else {
        for (std::int64_t i = 0; i < n; ++i) body(i);
    }
}

inline double shape_value(double phase, double amplitude_vpp,
                          std::span<const double> harmonic_levels) {
    double v = std::sin(phase);
    for (std::size_t k = 0; k < harmonic_levels.size(); ++k)
        v += harmonic_levels[k] * std::sin(static_cast<double>(k + 2) * phase);
    return 0.5 * amplitude_vpp * v;
}

} // namespace

void render_tone(std::span<double> out, const ToneParams& p, Exec exec) {
    const double omega = kTwoPi * p.frequency_hz / p.sample_rate;
    for_each_index(static_cast<std::int64_t>(out.size()), exec, [&](std::int64_t i) {
        double v = shape_value(omega * static_cast<double>(i), p.amplitude_vpp, p.harmonic_levels);
        v += p.dc_offset;
        if (p.noise_sigma > 0.0)
            v += p.noise_sigma * rng::gaussian(p.rng_seed, static_cast<std::uint64_t>(i));
        out[static_cast<std::size_t>(i)] = v;
    });
}

void render_fm(std::span<double> out, const FmParams& p, Exec exec) {
    const auto& kt = p.knot_time_s;
    const auto& kf = p.knot_freq_hz;
    const auto& kp = p.knot_phase_rad;
    for_each_index(static_cast<std::int64_t>(out.size()), exec, [&](std::int64_t i) {
        const double t = p.start_time_s + static_cast<double>(i) / p.sample_rate;
        // Segment containing t: kt[j] <= t < kt[j+1] (last segment extended).
        auto it = std::upper_bound(kt.begin(), kt.end(), t);
        std::size_t j = (it == kt.begin()) ? 0 : static_cast<std::size_t>(it - kt.begin()) - 1;
        if (j >= kt.size() - 1) j = kt.size() - 2;
        const double dt_seg = kt[j + 1] - kt[j];
        const double slope = (kf[j + 1] - kf[j]) / dt_seg;
        const double tau = t - kt[j];
        const double phase = kp[j] + kTwoPi * (kf[j] * tau + 0.5 * slope * tau * tau);
        double v = shape_value(phase, p.amplitude_vpp, p.harmonic_levels);
        v += p.dc_offset;
        if (p.noise_sigma > 0.0)
            v += p.noise_sigma * rng::gaussian(p.rng_seed, static_cast<std::uint64_t>(i));
        out[static_cast<std::size_t>(i)] = v;
    });
}

void quantize_midrise(std::span<double> inout, int bits, double full_scale, Exec exec) {
    const double step = full_scale * std::ldexp(1.0, -bits);
    const std::int64_t max_level = (std::int64_t{1} << bits) - 1;
    for_each_index(static_cast<std::int64_t>(inout.size()), exec, [&](std::int64_t i) {
        const double v = inout[static_cast<std::size_t>(i)];
        std::int64_t level = static_cast<std::int64_t>(std::floor(v / step));
        level = std::clamp<std::int64_t>(level, 0, max_level);
        inout[static_cast<std::size_t>(i)] = (static_cast<double>(level) + 0.5) * step;
    });
}

void rectify_abs(std::span<double> inout, Exec exec) {
    for_each_index(static_cast<std::int64_t>(inout.size()), exec, [&](std::int64_t i) {
        inout[static_cast<std::size_t>(i)] = std::fabs(inout[static_cast<std::size_t>(i)]);
    });
}

void subtract(std::span<const double> a, std::span<const double> b,
              std::span<double> out, Exec exec) {
    for_each_index(static_cast<std::int64_t>(out.size()), exec, [&](std::int64_t i) {
        out[static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(i)] - b[static_cast<std::size_t>(i)];
    });
}

} // namespace gridcharge::kernels
