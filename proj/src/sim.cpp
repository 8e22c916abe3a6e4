#include "gridcharge/sim.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "gridcharge/csvio.hpp"
#include "gridcharge/errors.hpp"
#include "gridcharge/rng.hpp"

namespace gridcharge::sim {

using signal::FrequencyTrace;

namespace {

/// Forward-only piecewise-linear sampler; the simulation advances time
/// monotonically so lookup is O(1) amortized.
class TraceCursor {
public:
    explicit TraceCursor(const FrequencyTrace& trace) : points_(trace.points) {}

    double at(double t) {
        while (idx_ + 2 < points_.size() && points_[idx_ + 1].time_s < t) ++idx_;
        const auto& a = points_[idx_];
        const auto& b = points_[idx_ + 1];
        if (t <= a.time_s) return a.frequency_hz;
        if (t >= b.time_s) return b.frequency_hz;
        const double w = (t - a.time_s) / (b.time_s - a.time_s);
        return a.frequency_hz + w * (b.frequency_hz - a.frequency_hz);
    }

private:
    const std::vector<signal::TracePoint>& points_;
    std::size_t idx_ = 0;
};

} // namespace

std::vector<SimRecord> run(const SimConfig& cfg) {
    if (!(cfg.dt_s > 0.0)) throw ConfigError("dt must be > 0");
    if (!(cfg.initial_charge >= 0.0 && cfg.initial_charge <= 1.0))
        throw ConfigError("initial_charge must be in [0, 1]");
    battery::validate(cfg.model);
    policy::validate(cfg.policy);
    if (cfg.trace.points.size() < 2 || cfg.trace.duration_s() < cfg.dt_s)
        throw InputError("trace shorter than one simulation step");

    const double t0 = cfg.trace.start_time_s();
    const auto steps = static_cast<std::size_t>(
        std::floor(cfg.trace.duration_s() / cfg.dt_s + 1e-9));

    std::vector<SimRecord> records;
    records.reserve(steps);
    TraceCursor cursor(cfg.trace);
    battery::BatteryState state{cfg.initial_charge, battery::Mode::Charging};
    policy::ControllerState ctl = cfg.initial_ctl;
    for (std::size_t k = 0; k < steps; ++k) {
        const double f = cursor.at(t0 + (static_cast<double>(k) + 0.5) * cfg.dt_s);
        const auto decision = policy::decide(cfg.policy, ctl, f, state.charge);
        ctl = decision.next;
        state = battery::step(state, cfg.model, decision.charging_enabled, cfg.dt_s);
        records.push_back({t0 + static_cast<double>(k + 1) * cfg.dt_s, f,
                           decision.charging_enabled, state.charge, state.mode});
    }
    return records;
}

SweepResult summarize(double threshold_hz, std::span<const SimRecord> records) {
    SweepResult r;
    r.threshold_hz = threshold_hz;
    r.steps = records.size();
    if (records.empty()) return r;

    double sum = 0.0;
    double min = records.front().charge;
    std::size_t at_zero = 0;
    bool prev = records.front().charging_enabled;
    for (const auto& rec : records) {
        sum += rec.charge;
        min = std::min(min, rec.charge);
        if (rec.charge <= 0.0) ++at_zero;
        const auto bin = std::min<std::size_t>(
            kHistogramBins - 1,
            static_cast<std::size_t>(rec.charge * static_cast<double>(kHistogramBins)));
        ++r.histogram[bin];
        if (rec.charging_enabled != prev) ++r.switch_count;
        prev = rec.charging_enabled;
    }
    r.mean_charge = sum / static_cast<double>(records.size());
    r.min_charge = min;
    r.time_at_zero_frac = static_cast<double>(at_zero) / static_cast<double>(records.size());
    return r;
}

std::vector<SweepResult> sweep(const FrequencyTrace& trace, const battery::BatteryModel& model,
                               std::span<const double> thresholds_hz, double dt_s,
                               double initial_charge) {
    if (thresholds_hz.empty()) throw ConfigError("sweep needs at least one threshold");

    std::vector<SweepResult> results(thresholds_hz.size());
    const std::int64_t n = static_cast<std::int64_t>(thresholds_hz.size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < n; ++i) {
        SimConfig cfg{trace, model,
                      policy::HardFrequencyThreshold{thresholds_hz[static_cast<std::size_t>(i)]},
                      dt_s, initial_charge, {}};
        const auto records = run(cfg);
        results[static_cast<std::size_t>(i)] =
            summarize(thresholds_hz[static_cast<std::size_t>(i)], records);
    }
    return results;
}

ModelComparison compare_models(const FrequencyTrace& trace,
                               std::span<const battery::BatteryModel> models,
                               const policy::ChargingPolicy& policy, double dt_s,
                               double initial_charge) {
    if (models.size() < 2) throw ConfigError("compare_models needs at least 2 models");

    ModelComparison cmp;
    cmp.records.resize(models.size());
    cmp.summary.resize(models.size());
    const std::int64_t n = static_cast<std::int64_t>(models.size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto& model = models[static_cast<std::size_t>(i)];
        SimConfig cfg{trace, model, policy, dt_s, initial_charge, {}};
        auto records = run(cfg);
        const auto s = summarize(0.0, records);
        cmp.summary[static_cast<std::size_t>(i)] = {model.name, s.mean_charge, s.min_charge};
        cmp.records[static_cast<std::size_t>(i)] = std::move(records);
    }
    return cmp;
}

FrequencyTrace synth_grid_trace(double duration_s, double dt_s, double mean_hz,
                                double reversion_rate, double volatility, std::uint64_t seed) {
    if (!(dt_s > 0.0)) throw ConfigError("trace dt must be > 0");
    if (!(duration_s >= dt_s)) throw ConfigError("trace duration must be at least dt");
    if (!(reversion_rate > 0.0)) throw ConfigError("reversion_rate must be > 0");
    if (volatility < 0.0) throw ConfigError("volatility must be >= 0");

    const auto n_steps = static_cast<std::size_t>(std::ceil(duration_s / dt_s - 1e-9));
    const double alpha = std::exp(-reversion_rate * dt_s);
    const double q =
        volatility * std::sqrt((1.0 - alpha * alpha) / (2.0 * reversion_rate));

    FrequencyTrace trace;
    trace.points.reserve(n_steps + 1);
    double x = mean_hz;
    trace.points.push_back({0.0, std::clamp(x, 49.5, 50.5)});
    for (std::size_t k = 0; k < n_steps; ++k) {
        x = mean_hz + (x - mean_hz) * alpha + q * rng::gaussian(seed, k);
        x = std::clamp(x, 49.5, 50.5);
        trace.points.push_back({static_cast<double>(k + 1) * dt_s, x});
    }
    return trace;
}

void save_records(std::ostream& out, std::span<const SimRecord> records) {
    out << "time_s,frequency_hz,charging,charge\n";
    for (const auto& r : records)
        out << csv::fmt(r.time_s) << ',' << csv::fmt(r.frequency_hz) << ','
            << (r.charging_enabled ? '1' : '0') << ',' << csv::fmt(r.charge) << '\n';
}

void save_sweep_histograms(std::ostream& out, std::span<const SweepResult> results) {
    out << "threshold_hz,bin_lo,bin_hi,count\n";
    const double width = 1.0 / static_cast<double>(kHistogramBins);
    for (const auto& r : results)
        for (std::size_t b = 0; b < kHistogramBins; ++b)
            out << csv::fmt(r.threshold_hz) << ',' << csv::fmt(static_cast<double>(b) * width)
                << ',' << csv::fmt(static_cast<double>(b + 1) * width) << ',' << r.histogram[b]
                << '\n';
}

void save_sweep_summary(std::ostream& out, std::span<const SweepResult> results) {
    out << "threshold_hz,mean_charge,min_charge,time_at_zero_frac,switch_count\n";
    for (const auto& r : results)
        out << csv::fmt(r.threshold_hz) << ',' << csv::fmt(r.mean_charge) << ','
            << csv::fmt(r.min_charge) << ',' << csv::fmt(r.time_at_zero_frac) << ','
            << r.switch_count << '\n';
}

} // namespace gridcharge::sim
