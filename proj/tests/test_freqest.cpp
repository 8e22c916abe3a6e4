#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "gridcharge/errors.hpp"
#include "gridcharge/freqest.hpp"
#include "gridcharge/signal.hpp"

using namespace gridcharge;
using freqest::BandpassDetectorConfig;
using freqest::Decision;
using freqest::ZeroCrossingConfig;
using signal::SynthSpec;
using signal::Waveform;

namespace {

ZeroCrossingConfig ideal_cfg(int n_averages = 1) {
    ZeroCrossingConfig cfg;
    cfg.n_averages = n_averages;
    cfg.timer_tick_s = 0.0;
    cfg.hysteresis_volts = 0.0;
    cfg.dc_reference_volts = 2.5;
    return cfg;
}

SynthSpec centered_spec() {
    SynthSpec spec;
    spec.dc_offset = 2.5;
    return spec;
}

double series_std(const freqest::FrequencyEstimateSeries& s) {
    double mean = 0.0;
    for (const auto& e : s.estimates) mean += e.frequency_hz;
    mean /= static_cast<double>(s.estimates.size());
    double ss = 0.0;
    for (const auto& e : s.estimates) ss += (e.frequency_hz - mean) * (e.frequency_hz - mean);
    return std::sqrt(ss / static_cast<double>(s.estimates.size() - 1));
}

double series_mean(const freqest::FrequencyEstimateSeries& s) {
    double mean = 0.0;
    for (const auto& e : s.estimates) mean += e.frequency_hz;
    return mean / static_cast<double>(s.estimates.size());
}

} // namespace

TEST_CASE("clean tone is recovered to sub-microhertz with one measurement per period") {
    const Waveform w = signal::synth_tone(50.0, 1.0, 20000.0, centered_spec());
    const auto series = freqest::estimate_frequency_zc(w, ideal_cfg());
    REQUIRE(series.estimates.size() > 40);
    for (const auto& e : series.estimates)
        CHECK(std::fabs(e.frequency_hz - 50.0) < 1e-6);
    for (std::size_t i = 1; i < series.estimates.size(); ++i)
        CHECK(series.estimates[i].time_s - series.estimates[i - 1].time_s ==
              doctest::Approx(0.020).epsilon(1e-9));
}

TEST_CASE("estimator scales to other frequencies") {
    const Waveform w = signal::synth_tone(25.0, 1.0, 20000.0, centered_spec());
    const auto series = freqest::estimate_frequency_zc(w, ideal_cfg());
    for (const auto& e : series.estimates)
        CHECK(std::fabs(e.frequency_hz - 25.0) < 1e-6);
}

TEST_CASE("fm round trip recovers trace plateaus within a millihertz") {
    std::mt19937_64 gen(31);
    std::uniform_real_distribution<double> f_dist(49.5, 50.5);
    for (int rep = 0; rep < 5; ++rep) {
        const double f1 = f_dist(gen), f2 = f_dist(gen);
        signal::FrequencyTrace trace;
        trace.points = {{0.0, f1}, {3.0, f1}, {3.5, f2}, {6.5, f2}};
        const Waveform w = signal::synth_from_trace(trace, 20000.0, centered_spec());
        const auto series = freqest::estimate_frequency_zc(w, ideal_cfg());
        std::size_t checked = 0;
        for (const auto& e : series.estimates) {
            if (e.time_s > 0.1 && e.time_s < 2.9) {
                CHECK(std::fabs(e.frequency_hz - f1) < 1e-3);
                ++checked;
            } else if (e.time_s > 3.6 && e.time_s < 6.4) {
                CHECK(std::fabs(e.frequency_hz - f2) < 1e-3);
                ++checked;
            }
        }
        CHECK(checked > 200);
    }
}

TEST_CASE("estimates stay within the range of the driving trace") {
    signal::FrequencyTrace trace;
    trace.points = {{0.0, 49.85}, {10.0, 50.20}, {20.0, 49.90}, {30.0, 50.05}};
    const Waveform w = signal::synth_from_trace(trace, 20000.0, centered_spec());
    const auto series = freqest::estimate_frequency_zc(w, ideal_cfg());
    for (const auto& e : series.estimates) {
        CHECK(e.frequency_hz > 49.85 - 1e-6);
        CHECK(e.frequency_hz < 50.20 + 1e-6);
    }
}

TEST_CASE("schmitt hysteresis: crossing count non-increasing, retriggers suppressed") {
    SynthSpec spec = centered_spec();
    spec.noise_sigma = 0.15;
    spec.rng_seed = 5;
    const Waveform noisy = signal::synth_tone(50.0, 2.0, 20000.0, spec);
    const Waveform clean = signal::synth_tone(50.0, 2.0, 20000.0, centered_spec());

    std::size_t prev_count = SIZE_MAX;
    for (double h : {0.0, 0.05, 0.2, 0.4}) {
        ZeroCrossingConfig cfg = ideal_cfg();
        cfg.hysteresis_volts = h;
        const auto events = freqest::crossing_times(noisy, cfg);
        CHECK(events.size() <= prev_count);
        prev_count = events.size();
    }
    // with noise well above a zero hysteresis band the comparator
    // retriggers; a wide band recovers the clean crossing count
    const auto clean_events = freqest::crossing_times(clean, ideal_cfg());
    const auto raw_events = freqest::crossing_times(noisy, ideal_cfg());
    CHECK(raw_events.size() > clean_events.size());
    ZeroCrossingConfig wide = ideal_cfg();
    wide.hysteresis_volts = 0.4;
    CHECK(freqest::crossing_times(noisy, wide).size() == clean_events.size());
}

TEST_CASE("timer tick quantizes crossing timestamps") {
    const Waveform w = signal::synth_tone(50.0, 1.0, 20000.0, centered_spec());
    ZeroCrossingConfig cfg = ideal_cfg();
    cfg.timer_tick_s = 1e-5;
    const auto events = freqest::crossing_times(w, cfg);
    for (double t : events) {
        const double ticks = t / cfg.timer_tick_s;
        CHECK(std::fabs(ticks - std::round(ticks)) < 1e-6);
    }
    const auto series = freqest::estimate_frequency_zc(w, cfg);
    for (const auto& e : series.estimates)
        CHECK(std::fabs(e.frequency_hz - 50.0) < 2500.0 * 2.0 * cfg.timer_tick_s + 1e-9);
}

TEST_CASE("estimator error paths") {
    // two crossings are not enough for one full period
    const Waveform w_short = signal::synth_tone(50.0, 0.025, 20000.0, centered_spec());
    CHECK_THROWS_AS(freqest::estimate_frequency_zc(w_short, ideal_cfg()), InputError);

    Waveform flat;
    flat.sample_rate = 20000.0;
    flat.samples.assign(1000, 1.0); // never near the 2.5 V reference
    CHECK_THROWS_AS(freqest::estimate_frequency_zc(flat, ideal_cfg()), InputError);

    const Waveform w = signal::synth_tone(50.0, 1.0, 20000.0, centered_spec());
    ZeroCrossingConfig bad = ideal_cfg();
    bad.n_averages = 0;
    CHECK_THROWS_AS(freqest::estimate_frequency_zc(w, bad), ConfigError);
    bad = ideal_cfg();
    bad.hysteresis_volts = -0.1;
    CHECK_THROWS_AS(freqest::estimate_frequency_zc(w, bad), ConfigError);
}

TEST_CASE("noisy estimates are unbiased") {
    SynthSpec spec = centered_spec();
    spec.noise_sigma = freqest::kCalibratedNoiseSigmaVolts;
    spec.rng_seed = 99;
    const Waveform w = signal::synth_tone(50.0, 90.0, 20000.0, spec); // ~4500 estimates
    const auto series = freqest::estimate_frequency_zc(w, ideal_cfg());
    REQUIRE(series.estimates.size() >= 4000);
    const double std_hz = series_std(series);
    CHECK(std::fabs(series_mean(series) - 50.0) <= std_hz / 10.0);
}

TEST_CASE("averaging tightens the estimate; log-log slope near -1") {
    SynthSpec spec = centered_spec();
    spec.noise_sigma = freqest::kCalibratedNoiseSigmaVolts;
    spec.rng_seed = 123;
    const Waveform w = signal::synth_tone(50.0, 400.0, 20000.0, spec);

    std::vector<int> ns{1, 10, 100};
    std::vector<double> stds;
    for (int n : ns) {
        const auto series = freqest::estimate_frequency_zc(w, ideal_cfg(n));
        stds.push_back(series_std(series));
    }
    CHECK(stds[1] <= stds[0]);
    CHECK(stds[2] <= stds[1]);
    const double slope = (std::log10(stds[2]) - std::log10(stds[0])) /
                         (std::log10(100.0) - std::log10(1.0));
    MESSAGE("averaging std slope (log-log): ", slope);
    CHECK(slope > -1.2);
    CHECK(slope < -0.4);
}

TEST_CASE("resolution study: noiseless limit and monotone trends") {
    std::vector<int> averages{1, 10};
    std::vector<double> amplitudes{0.5, 1.0};

    SynthSpec clean = centered_spec();
    const auto quiet = freqest::resolution_study(clean, ideal_cfg(), averages, amplitudes, 50.0,
                                                 20000.0, 100);
    for (const auto& cell : quiet) CHECK(cell.std_hz <= 1e-9);

    SynthSpec noisy = centered_spec();
    noisy.noise_sigma = freqest::kCalibratedNoiseSigmaVolts;
    noisy.rng_seed = 17;
    std::vector<int> n_list{1, 10, 100};
    std::vector<double> a_list{0.5, 1.0, 2.0};
    const auto cells =
        freqest::resolution_study(noisy, ideal_cfg(), n_list, a_list, 50.0, 20000.0, 200);
    REQUIRE(cells.size() == n_list.size() * a_list.size());
    auto cell = [&](std::size_t ni, std::size_t ai) -> const freqest::ResolutionCell& {
        return cells[ni * a_list.size() + ai];
    };
    for (std::size_t ai = 0; ai < a_list.size(); ++ai)
        for (std::size_t ni = 1; ni < n_list.size(); ++ni)
            CHECK(cell(ni, ai).std_hz <= cell(ni - 1, ai).std_hz);
    for (std::size_t ni = 0; ni < n_list.size(); ++ni)
        for (std::size_t ai = 1; ai < a_list.size(); ++ai)
            CHECK(cell(ni, ai).std_hz <= cell(ni, ai - 1).std_hz);
    for (const auto& c : cells) CHECK(c.n_estimates >= 200);
}

TEST_CASE("detector decides constant tones and stays settled") {
    BandpassDetectorConfig cfg; // threshold 50.0, uncalibrated
    const SynthSpec spec;       // 1 Vpp, no DC (prefilter strips DC anyway)

    const Waveform above = signal::synth_tone(50.2, 40.0, 20000.0, spec);
    const auto sa = freqest::detect_above_threshold(above, cfg);
    CHECK(sa.settled_from == 600000);
    CHECK(sa.transitions().empty());
    CHECK(sa.decisions[sa.settled_from] == Decision::On);
    CHECK(sa.decisions.back() == Decision::On);
    CHECK(sa.decisions[0] == Decision::Settling);

    const Waveform below = signal::synth_tone(49.8, 40.0, 20000.0, spec);
    const auto sb = freqest::detect_above_threshold(below, cfg);
    CHECK(sb.transitions().empty());
    CHECK(sb.decisions.back() == Decision::Off);
}

TEST_CASE("calibrated detector agrees with the zero-crossing estimator near the threshold") {
    BandpassDetectorConfig cfg;
    const auto cal = freqest::calibrate_detector(cfg);
    MESSAGE("calibration offset: ", cal.calibration_offset_hz, " Hz");
    CHECK(std::fabs(cal.calibration_offset_hz) < 0.1);

    const SynthSpec spec;
    SynthSpec centered = centered_spec();
    for (double f : {49.95, 50.05}) {
        const Waveform w = signal::synth_tone(f, 40.0, 20000.0, spec);
        const auto series = freqest::detect_above_threshold(w, cal);
        CHECK(series.transitions().empty());
        const bool detected_above = series.decisions.back() == Decision::On;

        const Waveform wz = signal::synth_tone(f, 2.0, 20000.0, centered);
        const bool measured_above =
            series_mean(freqest::estimate_frequency_zc(wz, ideal_cfg())) >= cfg.threshold_hz;
        CHECK(detected_above == measured_above);
    }
}

TEST_CASE("detector input validation") {
    BandpassDetectorConfig cfg;
    const Waveform wrong_rate = signal::synth_tone(50.0, 40.0, 10000.0, SynthSpec{});
    CHECK_THROWS_AS(freqest::detect_above_threshold(wrong_rate, cfg), InputError);
    const Waveform too_short = signal::synth_tone(50.0, 10.0, 20000.0, SynthSpec{});
    CHECK_THROWS_AS(freqest::detect_above_threshold(too_short, cfg), InputError);

    BandpassDetectorConfig bad = cfg;
    bad.detune_hz = 1.5;
    CHECK_THROWS_AS(freqest::detect_above_threshold(too_short, bad), ConfigError);
    bad = cfg;
    bad.filter_order = 5;
    CHECK_THROWS_AS(freqest::detect_above_threshold(too_short, bad), ConfigError);
    bad = cfg;
    bad.prefilter_band = {45.0, 11000.0};
    CHECK_THROWS_AS(freqest::detect_above_threshold(too_short, bad), ConfigError);
}
