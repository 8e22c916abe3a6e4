#include "gridcharge/freqest.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "gridcharge/csvio.hpp"
#include "gridcharge/errors.hpp"
#include "gridcharge/filter.hpp"
#include "gridcharge/kernels.hpp"
#include "gridcharge/rng.hpp"

namespace gridcharge::freqest {

using signal::Waveform;

// ---------------------------------------------------------------------------
// Detector
// ---------------------------------------------------------------------------

void validate(const BandpassDetectorConfig& cfg) {
    if (!(cfg.detune_hz > 0.0 && cfg.detune_hz < 1.0))
        throw ConfigError("detune_hz must be in (0, 1) Hz");
    if (!(cfg.sample_rate > 0.0)) throw ConfigError("sample_rate must be > 0");
    if (!(cfg.prefilter_band.first > 0.0 &&
          cfg.prefilter_band.first < cfg.prefilter_band.second &&
          cfg.prefilter_band.second < 0.5 * cfg.sample_rate))
        throw ConfigError("prefilter band must lie inside (0, sample_rate/2)");
    if (cfg.filter_order < 2 || cfg.filter_order % 2 != 0)
        throw ConfigError("filter_order must be even and >= 2");
    if (!(cfg.envelope_lowpass_hz > 0.0 && cfg.final_lowpass_hz > 0.0))
        throw ConfigError("lowpass corners must be > 0");
    if (!(cfg.settle_time_s >= 0.0)) throw ConfigError("settle_time_s must be >= 0");
}

std::vector<std::size_t> DetectionSeries::transitions() const {
    std::vector<std::size_t> idx;
    for (std::size_t i = settled_from + 1; i < decisions.size(); ++i)
        if (decisions[i] != decisions[i - 1]) idx.push_back(i);
    return idx;
}

DetectionSeries detect_above_threshold(const Waveform& w, const BandpassDetectorConfig& cfg) {
    validate(cfg);
    signal::validate(w);
    if (w.sample_rate != cfg.sample_rate)
        throw InputError("waveform sample rate " + csv::fmt(w.sample_rate) +
                         " does not match detector sample rate " + csv::fmt(cfg.sample_rate));
    if (w.duration_s() <= cfg.settle_time_s)
        throw InputError("waveform shorter than the detector settling time (" +
                         csv::fmt(cfg.settle_time_s) + " s)");

    const double fs = cfg.sample_rate;
    const double center = cfg.threshold_hz - cfg.calibration_offset_hz;
    const auto pre = filter::design_bandpass(cfg.filter_order, cfg.prefilter_band.first,
                                             cfg.prefilter_band.second, fs);
    const auto bp_low =
        filter::design_bandpass(cfg.filter_order, center - 2.0 * cfg.detune_hz, center, fs);
    const auto bp_high =
        filter::design_bandpass(cfg.filter_order, center, center + 2.0 * cfg.detune_hz, fs);
    const auto env = filter::design_lowpass(2, cfg.envelope_lowpass_hz, fs);
    const auto fin = filter::design_lowpass(2, cfg.final_lowpass_hz, fs);

    const std::vector<double> x = pre.filter(w.samples);

    std::vector<double> e_low, e_high;
#pragma omp parallel sections
    {
#pragma omp section
        {
            std::vector<double> y = bp_low.filter(x);
            kernels::rectify_abs(y, kernels::Exec::Serial);
            e_low = env.filter(y);
        }
#pragma omp section
        {
            std::vector<double> y = bp_high.filter(x);
            kernels::rectify_abs(y, kernels::Exec::Serial);
            e_high = env.filter(y);
        }
    }

    std::vector<double> diff(x.size());
    kernels::subtract(e_low, e_high, diff, kernels::Exec::Parallel);
    const std::vector<double> d = fin.filter(diff);

    DetectionSeries out;
    out.sample_rate = fs;
    out.settled_from =
        std::min(static_cast<std::size_t>(std::ceil(cfg.settle_time_s * fs)), d.size());
    out.decisions.resize(d.size(), Decision::Settling);
    bool prev = false; // comparator ties retain the previous decision
    for (std::size_t i = out.settled_from; i < d.size(); ++i) {
        if (d[i] < 0.0)
            prev = true;
        else if (d[i] > 0.0)
            prev = false;
        out.decisions[i] = prev ? Decision::On : Decision::Off;
    }
    return out;
}

BandpassDetectorConfig calibrate_detector(BandpassDetectorConfig cfg, double chirp_span_hz,
                                          double chirp_duration_s, double tolerance_hz,
                                          int max_iterations) {
    validate(cfg);
    if (!(chirp_span_hz > 0.0 && chirp_duration_s > cfg.settle_time_s))
        throw ConfigError("calibration chirp must be longer than the settling time");

    const double f_start = cfg.threshold_hz - 0.5 * chirp_span_hz;
    signal::FrequencyTrace chirp;
    chirp.points = {{0.0, f_start}, {chirp_duration_s, cfg.threshold_hz + 0.5 * chirp_span_hz}};
    signal::SynthSpec spec; // clean 1 Vpp
    const Waveform w = signal::synth_from_trace(chirp, cfg.sample_rate, spec);

    for (int iter = 0; iter < max_iterations; ++iter) {
        const DetectionSeries series = detect_above_threshold(w, cfg);
        const auto flips = series.transitions();
        std::size_t on_index = 0;
        bool found = false;
        for (std::size_t i : flips) {
            if (series.decisions[i] == Decision::On) {
                on_index = i;
                found = true;
                break;
            }
        }
        if (!found)
            throw NumericalError("detector calibration found no off-to-on transition");
        const double t = static_cast<double>(on_index) / cfg.sample_rate;
        const double measured_hz = f_start + chirp_span_hz * t / chirp_duration_s;
        const double err = measured_hz - cfg.threshold_hz;
        cfg.calibration_offset_hz += err;
        if (std::fabs(err) <= tolerance_hz) return cfg;
    }
    throw NumericalError("detector calibration did not converge to " +
                         csv::fmt(tolerance_hz) + " Hz");
}

// ---------------------------------------------------------------------------
// Zero-crossing estimator
// ---------------------------------------------------------------------------

void validate(const ZeroCrossingConfig& cfg) {
    if (cfg.n_averages < 1) throw ConfigError("n_averages must be >= 1");
    if (cfg.hysteresis_volts < 0.0) throw ConfigError("hysteresis_volts must be >= 0");
    if (cfg.timer_tick_s < 0.0) throw ConfigError("timer_tick_s must be >= 0");
}

std::vector<double> crossing_times(const Waveform& w, const ZeroCrossingConfig& cfg) {
    validate(cfg);
    signal::validate(w);
    if (w.samples.size() < 2) throw InputError("waveform too short for crossing detection");

    const double ref = cfg.dc_reference_volts;
    const double up = ref + cfg.hysteresis_volts;
    const double down = ref - cfg.hysteresis_volts;
    const auto [mn, mx] = std::minmax_element(w.samples.begin(), w.samples.end());
    if (!(*mn < down && *mx > up))
        throw InputError("reference level (with hysteresis) outside the signal range; "
                         "no crossings possible");

    std::vector<double> events;
    events.reserve(w.samples.size() / 16);
    int state = 0; // 0 unknown, +1 above up-level, -1 below down-level
    if (w.samples[0] > up) state = 1;
    else if (w.samples[0] < down) state = -1;

    const double dt = 1.0 / w.sample_rate;
    double prev_event = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < w.samples.size(); ++i) {
        const double v = w.samples[i];
        double level;
        int next_state;
        if (state != 1 && v > up) {
            level = up;
            next_state = 1;
        } else if (state != -1 && v < down) {
            level = down;
            next_state = -1;
        } else {
            continue;
        }
        if (state == 0) { // first definite excursion; no timed event yet
            state = next_state;
            continue;
        }
        const double v0 = w.samples[i - 1];
        // next_state==1 implies v > up >= v0; symmetric for falling.
        const double frac = (level - v0) / (v - v0);
        double t = (static_cast<double>(i - 1) + frac) * dt;
        if (cfg.timer_tick_s > 0.0)
            t = static_cast<double>(std::llround(t / cfg.timer_tick_s)) * cfg.timer_tick_s;
        if (!(t > prev_event))
            throw NumericalError("crossing interval collapsed to zero near t=" + csv::fmt(t) +
                                 " s (noise beyond the timer resolution)");
        events.push_back(t);
        prev_event = t;
        state = next_state;
    }
    return events;
}

namespace {

std::vector<FrequencyEstimate> estimates_from_events(std::span<const double> events,
                                                     int n_averages) {
    // One estimate per n_averages full periods = 2*n_averages consecutive
    // crossing intervals; endpoints of a group share the same crossing
    // direction, so hysteresis asymmetry cancels exactly.
    const std::size_t group = 2 * static_cast<std::size_t>(n_averages);
    std::vector<FrequencyEstimate> est;
    if (events.size() < group + 1) return est;
    const std::size_t n_groups = (events.size() - 1) / group;
    est.reserve(n_groups);
    for (std::size_t k = 0; k < n_groups; ++k) {
        const double start = events[k * group];
        const double end = events[k * group + group];
        est.push_back({0.5 * (start + end), static_cast<double>(n_averages) / (end - start)});
    }
    return est;
}

} // namespace

FrequencyEstimateSeries estimate_frequency_zc(const Waveform& w, const ZeroCrossingConfig& cfg) {
    const std::vector<double> events = crossing_times(w, cfg);
    FrequencyEstimateSeries series;
    series.config = cfg;
    series.estimates = estimates_from_events(events, cfg.n_averages);
    if (series.estimates.empty())
        throw InputError("found " + std::to_string(events.size()) + " crossings; need at least " +
                         std::to_string(2 * cfg.n_averages + 1) + " for one estimate");
    return series;
}

void save_estimates(std::ostream& out, const FrequencyEstimateSeries& series) {
    out << "time_s,frequency_hz\n";
    for (const auto& e : series.estimates)
        out << csv::fmt(e.time_s) << ',' << csv::fmt(e.frequency_hz) << '\n';
}

// ---------------------------------------------------------------------------
// Resolution study
// ---------------------------------------------------------------------------

namespace {

double sample_std(std::span<const FrequencyEstimate> est) {
    const std::size_t n = est.size();
    double mean = 0.0;
    for (const auto& e : est) mean += e.frequency_hz;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (const auto& e : est) {
        const double d = e.frequency_hz - mean;
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(n - 1));
}

} // namespace

std::vector<ResolutionCell> resolution_study(const signal::SynthSpec& spec,
                                             const ZeroCrossingConfig& cfg,
                                             std::span<const int> averages_list,
                                             std::span<const double> amplitudes_list,
                                             double tone_hz, double sample_rate,
                                             std::size_t min_estimates) {
    signal::validate(spec);
    validate(cfg);
    if (averages_list.empty() || amplitudes_list.empty())
        throw ConfigError("resolution study needs at least one averaging count and amplitude");
    for (int n : averages_list)
        if (n < 1) throw ConfigError("averaging counts must be >= 1");
    for (double a : amplitudes_list)
        if (!(a > 0.0)) throw ConfigError("amplitudes must be > 0");
    if (min_estimates < 2) throw ConfigError("min_estimates must be >= 2");

    const int n_max = *std::max_element(averages_list.begin(), averages_list.end());
    const double duration =
        (static_cast<double>(min_estimates) * 2.0 * n_max + 4.0) * (0.5 / tone_hz);

    // One waveform (and one crossing scan) per amplitude, shared across all
    // averaging counts.
    std::vector<std::vector<double>> events_per_amp(amplitudes_list.size());
    std::int64_t n_amp = static_cast<std::int64_t>(amplitudes_list.size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t a = 0; a < n_amp; ++a) {
        signal::SynthSpec s = spec;
        s.amplitude_vpp = amplitudes_list[static_cast<std::size_t>(a)];
        s.rng_seed = rng::derive_seed(spec.rng_seed, static_cast<std::uint64_t>(a));
        const Waveform w =
            signal::synth_tone(tone_hz, duration, sample_rate, s, kernels::Exec::Serial);
        events_per_amp[static_cast<std::size_t>(a)] = crossing_times(w, cfg);
    }

    std::vector<ResolutionCell> cells;
    cells.reserve(averages_list.size() * amplitudes_list.size());
    for (int n : averages_list) {
        for (std::size_t a = 0; a < amplitudes_list.size(); ++a) {
            const auto est = estimates_from_events(events_per_amp[a], n);
            if (est.size() < min_estimates)
                throw NumericalError("resolution cell (n=" + std::to_string(n) + ", " +
                                     csv::fmt(amplitudes_list[a]) + " Vpp) produced only " +
                                     std::to_string(est.size()) + " estimates; need " +
                                     std::to_string(min_estimates));
            cells.push_back({n, amplitudes_list[a], sample_std(est), est.size()});
        }
    }
    return cells;
}

void save_resolution_table(std::ostream& out, std::span<const ResolutionCell> cells) {
    out << "n_averages,amplitude_vpp,std_hz\n";
    for (const auto& c : cells)
        out << c.n_averages << ',' << csv::fmt(c.amplitude_vpp) << ',' << csv::fmt(c.std_hz)
            << '\n';
}

} // namespace gridcharge::freqest
