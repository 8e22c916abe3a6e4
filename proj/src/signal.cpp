#include "gridcharge/signal.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "gridcharge/csvio.hpp"
#include "gridcharge/errors.hpp"

namespace gridcharge::signal {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::size_t sample_count(double duration_s, double sample_rate) {
    return static_cast<std::size_t>(std::llround(duration_s * sample_rate));
}

void check_nyquist(double frequency_hz, double sample_rate, const SynthSpec& spec) {
    double max_harmonic = 1.0;
    for (std::size_t k = 0; k < spec.harmonic_levels.size(); ++k)
        if (spec.harmonic_levels[k] > 0.0)
            max_harmonic = static_cast<double>(k + 2);
    if (frequency_hz * max_harmonic >= 0.5 * sample_rate)
        throw ConfigError("synthesis would alias: " + csv::fmt(frequency_hz * max_harmonic) +
                          " Hz is at or above Nyquist (" + csv::fmt(0.5 * sample_rate) + " Hz)");
}

void apply_quantizer(Waveform& w, const SynthSpec& spec, Exec exec) {
    if (spec.quantizer_bits)
        w.samples = quantize(w, *spec.quantizer_bits, spec.quantizer_range, exec).samples;
}

} // namespace

double FrequencyTrace::frequency_at(double time_s) const {
    const auto& p = points;
    if (time_s <= p.front().time_s) return p.front().frequency_hz;
    if (time_s >= p.back().time_s) return p.back().frequency_hz;
    auto it = std::upper_bound(p.begin(), p.end(), time_s,
                               [](double t, const TracePoint& q) { return t < q.time_s; });
    const auto& b = *it;
    const auto& a = *(it - 1);
    const double w = (time_s - a.time_s) / (b.time_s - a.time_s);
    return a.frequency_hz + w * (b.frequency_hz - a.frequency_hz);
}

void validate(const SynthSpec& spec) {
    if (!(spec.amplitude_vpp > 0.0))
        throw ConfigError("amplitude_vpp must be > 0");
    if (spec.noise_sigma < 0.0)
        throw ConfigError("noise_sigma must be >= 0");
    for (double level : spec.harmonic_levels)
        if (level < 0.0) throw ConfigError("harmonic levels must be >= 0");
    if (spec.quantizer_bits && (*spec.quantizer_bits < 1 || *spec.quantizer_bits > 32))
        throw ConfigError("quantizer_bits must be in [1, 32]");
    if (spec.quantizer_bits && !(spec.quantizer_range > 0.0))
        throw ConfigError("quantizer_range must be > 0");
}

void validate(const Waveform& w) {
    if (!(w.sample_rate > 0.0))
        throw InputError("waveform sample rate must be > 0");
    for (double v : w.samples)
        if (!std::isfinite(v)) throw InputError("waveform contains non-finite samples");
}

void validate(const FrequencyTrace& trace, const TraceBounds& bounds) {
    if (trace.empty()) throw InputError("trace is empty");
    double prev = -std::numeric_limits<double>::infinity();
    for (const auto& p : trace.points) {
        if (!std::isfinite(p.time_s) || !std::isfinite(p.frequency_hz))
            throw InputError("trace contains non-finite values");
        if (p.time_s <= prev)
            throw InputError("trace timestamps must be strictly increasing");
        if (p.frequency_hz < bounds.min_hz || p.frequency_hz > bounds.max_hz)
            throw InputError("trace frequency " + csv::fmt(p.frequency_hz) +
                             " outside validity bounds [" + csv::fmt(bounds.min_hz) + ", " +
                             csv::fmt(bounds.max_hz) + "]");
        prev = p.time_s;
    }
}

Waveform synth_tone(double frequency_hz, double duration_s, double sample_rate,
                    const SynthSpec& spec, Exec exec) {
    validate(spec);
    if (!(sample_rate > 0.0)) throw ConfigError("sample_rate must be > 0");
    if (!(frequency_hz > 0.0)) throw ConfigError("frequency must be > 0");
    if (!(duration_s > 0.0)) throw ConfigError("duration must be > 0");
    check_nyquist(frequency_hz, sample_rate, spec);

    Waveform w;
    w.sample_rate = sample_rate;
    w.samples.resize(sample_count(duration_s, sample_rate));
    kernels::ToneParams p;
    p.frequency_hz = frequency_hz;
    p.sample_rate = sample_rate;
    p.amplitude_vpp = spec.amplitude_vpp;
    p.dc_offset = spec.dc_offset;
    p.noise_sigma = spec.noise_sigma;
    p.harmonic_levels = spec.harmonic_levels;
    p.rng_seed = spec.rng_seed;
    kernels::render_tone(w.samples, p, exec);
    apply_quantizer(w, spec, exec);
    return w;
}

Waveform synth_from_trace(const FrequencyTrace& trace, double sample_rate,
                          const SynthSpec& spec, Exec exec) {
    validate(spec);
    if (!(sample_rate > 0.0)) throw ConfigError("sample_rate must be > 0");
    if (trace.points.size() < 2) throw InputError("trace must cover a positive duration");
    validate(trace, TraceBounds{0.0, std::numeric_limits<double>::infinity()});
    for (const auto& p : trace.points)
        check_nyquist(p.frequency_hz, sample_rate, spec);

    // Accumulated phase at each knot; within a segment the frequency is
    // linear, so the phase is quadratic and exact.
    const std::size_t n_knots = trace.points.size();
    std::vector<double> kt(n_knots), kf(n_knots), kp(n_knots);
    for (std::size_t i = 0; i < n_knots; ++i) {
        kt[i] = trace.points[i].time_s;
        kf[i] = trace.points[i].frequency_hz;
    }
    kp[0] = 0.0;
    for (std::size_t i = 1; i < n_knots; ++i) {
        const double dt = kt[i] - kt[i - 1];
        kp[i] = kp[i - 1] + kTwoPi * 0.5 * (kf[i] + kf[i - 1]) * dt;
    }

    Waveform w;
    w.sample_rate = sample_rate;
    w.samples.resize(sample_count(trace.duration_s(), sample_rate));
    kernels::FmParams p;
    p.knot_time_s = kt;
    p.knot_freq_hz = kf;
    p.knot_phase_rad = kp;
    p.start_time_s = trace.start_time_s();
    p.sample_rate = sample_rate;
    p.amplitude_vpp = spec.amplitude_vpp;
    p.dc_offset = spec.dc_offset;
    p.noise_sigma = spec.noise_sigma;
    p.harmonic_levels = spec.harmonic_levels;
    p.rng_seed = spec.rng_seed;
    kernels::render_fm(w.samples, p, exec);
    apply_quantizer(w, spec, exec);
    return w;
}

Waveform quantize(const Waveform& w, int bits, double full_scale, Exec exec) {
    if (bits < 1 || bits > 32) throw ConfigError("quantizer bits must be in [1, 32]");
    if (!(full_scale > 0.0)) throw ConfigError("quantizer full_scale must be > 0");
    Waveform out = w;
    kernels::quantize_midrise(out.samples, bits, full_scale, exec);
    return out;
}

FrequencyTrace load_trace(std::istream& in, const TraceBounds& bounds) {
    FrequencyTrace trace;
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line))
        throw InputError("trace: empty input");
    ++line_no;
    if (csv::strip_cr(line) != "time_s,frequency_hz")
        throw InputError("trace line 1: expected header 'time_s,frequency_hz'");

    double prev_time = -std::numeric_limits<double>::infinity();
    while (std::getline(in, line)) {
        ++line_no;
        auto sv = csv::strip_cr(line);
        if (sv.empty()) continue;
        auto fields = csv::split(sv);
        const std::string at_line = "trace line " + std::to_string(line_no);
        if (fields.size() != 2)
            throw InputError(at_line + ": expected 2 fields, got " + std::to_string(fields.size()));
        TracePoint p;
        if (!csv::parse_double(fields[0], p.time_s))
            throw InputError(at_line + ": cannot parse time_s '" + std::string(fields[0]) + "'");
        if (!csv::parse_double(fields[1], p.frequency_hz))
            throw InputError(at_line + ": cannot parse frequency_hz '" + std::string(fields[1]) + "'");
        if (!std::isfinite(p.time_s) || !std::isfinite(p.frequency_hz))
            throw InputError(at_line + ": non-finite value");
        if (p.time_s <= prev_time)
            throw InputError(at_line + ": timestamps must be strictly increasing");
        if (p.frequency_hz < bounds.min_hz || p.frequency_hz > bounds.max_hz)
            throw InputError(at_line + ": frequency " + csv::fmt(p.frequency_hz) +
                             " outside validity bounds [" + csv::fmt(bounds.min_hz) + ", " +
                             csv::fmt(bounds.max_hz) + "]");
        prev_time = p.time_s;
        trace.points.push_back(p);
    }
    if (trace.empty()) throw InputError("trace: no data rows");
    return trace;
}

FrequencyTrace load_trace_file(const std::string& path, const TraceBounds& bounds) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open trace file '" + path + "'");
    return load_trace(in, bounds);
}

void save_trace(std::ostream& out, const FrequencyTrace& trace) {
    out << "time_s,frequency_hz\n";
    for (const auto& p : trace.points)
        out << csv::fmt(p.time_s) << ',' << csv::fmt(p.frequency_hz) << '\n';
}

void save_waveform(std::ostream& out, const Waveform& w) {
    out << "time_s,volts\n";
    for (std::size_t i = 0; i < w.samples.size(); ++i)
        out << csv::fmt(static_cast<double>(i) / w.sample_rate) << ',' << csv::fmt(w.samples[i])
            << '\n';
}

Waveform load_waveform(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw InputError("waveform: empty input");
    ++line_no;
    if (csv::strip_cr(line) != "time_s,volts")
        throw InputError("waveform line 1: expected header 'time_s,volts'");

    std::vector<double> times;
    Waveform w;
    while (std::getline(in, line)) {
        ++line_no;
        auto sv = csv::strip_cr(line);
        if (sv.empty()) continue;
        auto fields = csv::split(sv);
        const std::string at_line = "waveform line " + std::to_string(line_no);
        if (fields.size() != 2)
            throw InputError(at_line + ": expected 2 fields");
        double t, v;
        if (!csv::parse_double(fields[0], t) || !csv::parse_double(fields[1], v))
            throw InputError(at_line + ": cannot parse row");
        times.push_back(t);
        w.samples.push_back(v);
    }
    if (times.size() < 2) throw InputError("waveform: need at least 2 samples");
    const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    if (!(dt > 0.0)) throw InputError("waveform: non-increasing time column");
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double step = times[i] - times[i - 1];
        if (std::fabs(step - dt) > 1e-6 * dt)
            throw InputError("waveform line " + std::to_string(i + 2) + ": non-uniform sampling");
    }
    w.sample_rate = 1.0 / dt;
    validate(w);
    return w;
}

Waveform load_waveform_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open waveform file '" + path + "'");
    return load_waveform(in);
}

} // namespace gridcharge::signal
