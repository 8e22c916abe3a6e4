// gridcharge: grid-frequency measurement chains and frequency-responsive
// battery-charging simulation.
//
// Every subcommand writes its data outputs plus manifest.json (the full
// parameter set, defaults included) and summary.json into --out. `replay`
// re-runs a manifest and reproduces the outputs byte for byte.

#include <CLI11.hpp>
#include <json.hpp>

#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "gridcharge/battery.hpp"
#include "gridcharge/csvio.hpp"
#include "gridcharge/errors.hpp"
#include "gridcharge/fleet.hpp"
#include "gridcharge/freqest.hpp"
#include "gridcharge/policy.hpp"
#include "gridcharge/signal.hpp"
#include "gridcharge/sim.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gridcharge;

namespace {

constexpr const char* kToolName = "gridcharge";
constexpr const char* kToolVersion = "1.0.0";

// ---------------------------------------------------------------------------
// Output handling: everything is computed first, then committed in one go,
// so a failing run leaves no partial files behind.
// ---------------------------------------------------------------------------

class OutputSet {
public:
    explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}

    void add(const std::string& name, std::string content) {
        files_.emplace_back(name, std::move(content));
    }

    void commit() {
        fs::create_directories(dir_);
        std::vector<fs::path> temps;
        try {
            for (const auto& [name, content] : files_) {
                const fs::path tmp = dir_ / (name + ".tmp");
                {
                    std::ofstream out(tmp, std::ios::binary);
                    if (!out) throw Error("cannot write '" + tmp.string() + "'");
                    out << content;
                    if (!out) throw Error("short write to '" + tmp.string() + "'");
                }
                temps.push_back(tmp);
            }
            for (std::size_t i = 0; i < files_.size(); ++i)
                fs::rename(temps[i], dir_ / files_[i].first);
        } catch (...) {
            for (const auto& t : temps) {
                std::error_code ec;
                fs::remove(t, ec);
            }
            throw;
        }
    }

private:
    fs::path dir_;
    std::vector<std::pair<std::string, std::string>> files_;
};

json make_manifest(const std::string& command, const json& params, const json& outputs) {
    return json{{"tool", kToolName},
                {"version", kToolVersion},
                {"command", command},
                {"params", params},
                {"outputs", outputs}};
}

void finish(OutputSet& out, const std::string& command, const json& params, const json& outputs,
            const json& summary) {
    out.add("summary.json", summary.dump(2) + "\n");
    out.add("manifest.json", make_manifest(command, params, outputs).dump(2) + "\n");
    out.commit();
}

std::vector<double> parse_double_list(const std::string& text, const std::string& what) {
    std::vector<double> values;
    if (text.empty()) return values;
    for (auto field : csv::split(text)) {
        double v;
        if (!csv::parse_double(field, v))
            throw ConfigError(what + ": cannot parse '" + std::string(field) + "'");
        values.push_back(v);
    }
    return values;
}

std::vector<int> parse_int_list(const std::string& text, const std::string& what) {
    std::vector<int> values;
    for (double v : parse_double_list(text, what)) {
        if (v != std::floor(v)) throw ConfigError(what + ": expected integers");
        values.push_back(static_cast<int>(v));
    }
    return values;
}

std::string sanitize(const std::string& name) {
    std::string out;
    for (char c : name)
        out += (std::isalnum(static_cast<unsigned char>(c)) != 0) ? c : '_';
    return out;
}

signal::SynthSpec spec_from(double amplitude, double dc, double noise, std::uint64_t seed,
                            const std::string& harmonics, int bits, double full_scale) {
    signal::SynthSpec spec;
    spec.amplitude_vpp = amplitude;
    spec.dc_offset = dc;
    spec.noise_sigma = noise;
    spec.rng_seed = seed;
    spec.harmonic_levels = parse_double_list(harmonics, "--harmonics");
    if (bits > 0) {
        spec.quantizer_bits = bits;
        spec.quantizer_range = full_scale;
    }
    return spec;
}

// ---------------------------------------------------------------------------
// Command parameter blocks. These are the manifest contents; every field is
// serialized, so no default stays silent.
// ---------------------------------------------------------------------------

struct SynthParams {
    double freq = 50.0;
    double duration = 1.0;
    double rate = 20000.0;
    double amplitude = 1.0;
    double dc = 0.0;
    double noise = 0.0;
    std::uint64_t seed = 0;
    std::string harmonics;
    int bits = 0; // 0 = no quantizer
    double full_scale = 5.0;
    std::string trace; // when set, FM-render this trace instead of a tone
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(SynthParams, freq, duration, rate, amplitude, dc,
                                                noise, seed, harmonics, bits, full_scale, trace)

struct EstimateParams {
    std::string waveform;
    int averages = 1;
    double hysteresis = 0.0;
    double tick = 4e-6;
    double reference = 2.5;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(EstimateParams, waveform, averages, hysteresis,
                                                tick, reference)

struct DetectParams {
    std::string waveform;
    double threshold = 50.0;
    double detune = 0.1;
    int order = 6;
    double prefilter_low = 45.0;
    double prefilter_high = 55.0;
    double envelope_lp = 1.0;
    double final_lp = 0.1;
    double settle = 30.0;
    bool calibrate = true;
    int stride = 1;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(DetectParams, waveform, threshold, detune, order,
                                                prefilter_low, prefilter_high, envelope_lp,
                                                final_lp, settle, calibrate, stride)

struct SimulateParams {
    std::string trace;
    std::string model = "laptop1";
    std::string policy = "hard:thr=50.0";
    double dt = 1.0;
    double initial_charge = 1.0;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(SimulateParams, trace, model, policy, dt,
                                                initial_charge)

struct SweepParams {
    std::string trace;
    std::string model = "laptop1";
    std::string thresholds = "49.995,49.985,49.975";
    double dt = 1.0;
    double initial_charge = 1.0;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(SweepParams, trace, model, thresholds, dt,
                                                initial_charge)

struct CompareParams {
    std::string trace;
    std::string models = "laptop1,laptop2";
    std::string policy = "hard:thr=50.0";
    double dt = 1.0;
    double initial_charge = 1.0;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(CompareParams, trace, models, policy, dt,
                                                initial_charge)

struct FleetParams {
    double devices = 20e6;
    double power = 50.0;
    double connected = 1.0;
    double duty = 1.0;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(FleetParams, devices, power, connected, duty)

struct ResolutionParams {
    double tone = 50.0;
    double rate = 20000.0;
    std::string averages = "1,3,10,30,100";
    std::string amplitudes = "0.5,1,2";
    double noise = freqest::kCalibratedNoiseSigmaVolts;
    std::uint64_t seed = 0;
    double dc = 2.5;
    int bits = 0;
    double full_scale = 5.0;
    double hysteresis = 0.0;
    double tick = 0.0;
    double reference = 2.5;
    int min_estimates = 200;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ResolutionParams, tone, rate, averages, amplitudes,
                                                noise, seed, dc, bits, full_scale, hysteresis,
                                                tick, reference, min_estimates)

struct TraceParams {
    double duration = 64800.0;
    double dt = 1.0;
    double mean = sim::kDefaultTraceMeanHz;
    double reversion = sim::kDefaultTraceReversionRate;
    double volatility = sim::kDefaultTraceVolatility;
    std::uint64_t seed = 0;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(TraceParams, duration, dt, mean, reversion,
                                                volatility, seed)

// ---------------------------------------------------------------------------
// Handlers
// ---------------------------------------------------------------------------

void run_synth(const SynthParams& p, const fs::path& dir) {
    const auto spec =
        spec_from(p.amplitude, p.dc, p.noise, p.seed, p.harmonics, p.bits, p.full_scale);
    signal::Waveform w;
    if (!p.trace.empty()) {
        const auto trace = signal::load_trace_file(p.trace);
        w = signal::synth_from_trace(trace, p.rate, spec);
    } else {
        w = signal::synth_tone(p.freq, p.duration, p.rate, spec);
    }
    std::ostringstream csv_out;
    signal::save_waveform(csv_out, w);

    OutputSet out(dir);
    out.add("waveform.csv", csv_out.str());
    finish(out, "synth", p,
           {{"waveform", "waveform.csv"}},
           {{"samples", w.samples.size()}, {"sample_rate", w.sample_rate}});
}

void run_estimate(const EstimateParams& p, const fs::path& dir) {
    if (p.waveform.empty()) throw ConfigError("estimate requires --waveform");
    const auto w = signal::load_waveform_file(p.waveform);
    freqest::ZeroCrossingConfig cfg;
    cfg.n_averages = p.averages;
    cfg.hysteresis_volts = p.hysteresis;
    cfg.timer_tick_s = p.tick;
    cfg.dc_reference_volts = p.reference;
    const auto series = freqest::estimate_frequency_zc(w, cfg);

    double mean = 0.0;
    for (const auto& e : series.estimates) mean += e.frequency_hz;
    mean /= static_cast<double>(series.estimates.size());
    double ss = 0.0;
    for (const auto& e : series.estimates) ss += (e.frequency_hz - mean) * (e.frequency_hz - mean);
    const double stdev = series.estimates.size() > 1
                             ? std::sqrt(ss / static_cast<double>(series.estimates.size() - 1))
                             : 0.0;

    std::ostringstream csv_out;
    freqest::save_estimates(csv_out, series);
    OutputSet out(dir);
    out.add("estimates.csv", csv_out.str());
    finish(out, "estimate", p,
           {{"estimates", "estimates.csv"}},
           {{"count", series.estimates.size()}, {"mean_hz", mean}, {"std_hz", stdev}});
}

void run_detect(const DetectParams& p, const fs::path& dir) {
    if (p.waveform.empty()) throw ConfigError("detect requires --waveform");
    if (p.stride < 1) throw ConfigError("--stride must be >= 1");
    const auto w = signal::load_waveform_file(p.waveform);

    freqest::BandpassDetectorConfig cfg;
    cfg.threshold_hz = p.threshold;
    cfg.detune_hz = p.detune;
    cfg.filter_order = p.order;
    cfg.prefilter_band = {p.prefilter_low, p.prefilter_high};
    cfg.envelope_lowpass_hz = p.envelope_lp;
    cfg.final_lowpass_hz = p.final_lp;
    cfg.settle_time_s = p.settle;
    cfg.sample_rate = w.sample_rate;
    if (p.calibrate) cfg = freqest::calibrate_detector(cfg);

    const auto series = freqest::detect_above_threshold(w, cfg);
    const auto flips = series.transitions();

    std::ostringstream csv_out;
    csv_out << "time_s,charging\n";
    for (std::size_t i = series.settled_from; i < series.decisions.size();
         i += static_cast<std::size_t>(p.stride))
        csv_out << csv::fmt(static_cast<double>(i) / series.sample_rate) << ','
                << (series.decisions[i] == freqest::Decision::On ? '1' : '0') << '\n';

    json transition_times = json::array();
    for (std::size_t i : flips)
        transition_times.push_back(static_cast<double>(i) / series.sample_rate);

    OutputSet out(dir);
    out.add("decisions.csv", csv_out.str());
    finish(out, "detect", p,
           {{"decisions", "decisions.csv"}},
           {{"calibration_offset_hz", cfg.calibration_offset_hz},
            {"transitions", transition_times},
            {"settled_from_s", static_cast<double>(series.settled_from) / series.sample_rate}});
}

void run_simulate(const SimulateParams& p, const fs::path& dir) {
    if (p.trace.empty()) throw ConfigError("simulate requires --trace");
    sim::SimConfig cfg{signal::load_trace_file(p.trace), battery::resolve_model(p.model),
                       policy::parse_policy(p.policy), p.dt, p.initial_charge, {}};
    const auto records = sim::run(cfg);
    const auto summary = sim::summarize(0.0, records);

    std::ostringstream csv_out;
    sim::save_records(csv_out, records);
    OutputSet out(dir);
    out.add("records.csv", csv_out.str());
    finish(out, "simulate", p,
           {{"records", "records.csv"}},
           {{"steps", summary.steps},
            {"mean_charge", summary.mean_charge},
            {"min_charge", summary.min_charge},
            {"time_at_zero_frac", summary.time_at_zero_frac},
            {"switch_count", summary.switch_count},
            {"charging_duty", fleet::duty_from_sim(records)}});
}

void run_sweep(const SweepParams& p, const fs::path& dir) {
    if (p.trace.empty()) throw ConfigError("sweep requires --trace");
    const auto thresholds = parse_double_list(p.thresholds, "--thresholds");
    if (thresholds.empty()) throw ConfigError("sweep needs at least one threshold");
    const auto trace = signal::load_trace_file(p.trace);
    const auto results =
        sim::sweep(trace, battery::resolve_model(p.model), thresholds, p.dt, p.initial_charge);

    std::ostringstream summary_csv, hist_csv;
    sim::save_sweep_summary(summary_csv, results);
    sim::save_sweep_histograms(hist_csv, results);

    json per_threshold = json::array();
    for (const auto& r : results)
        per_threshold.push_back({{"threshold_hz", r.threshold_hz},
                                 {"mean_charge", r.mean_charge},
                                 {"min_charge", r.min_charge},
                                 {"time_at_zero_frac", r.time_at_zero_frac},
                                 {"switch_count", r.switch_count}});

    OutputSet out(dir);
    out.add("sweep_summary.csv", summary_csv.str());
    out.add("sweep_hist.csv", hist_csv.str());
    finish(out, "sweep", p,
           {{"summary", "sweep_summary.csv"}, {"histogram", "sweep_hist.csv"}},
           {{"thresholds", per_threshold}});
}

void run_compare(const CompareParams& p, const fs::path& dir) {
    if (p.trace.empty()) throw ConfigError("compare requires --trace");
    std::vector<battery::BatteryModel> models;
    for (auto name : csv::split(p.models)) models.push_back(battery::resolve_model(std::string(name)));
    const auto trace = signal::load_trace_file(p.trace);
    const auto cmp =
        sim::compare_models(trace, models, policy::parse_policy(p.policy), p.dt, p.initial_charge);

    OutputSet out(dir);
    json outputs;
    std::ostringstream summary_csv;
    summary_csv << "model,mean_charge,min_charge\n";
    json rows = json::array();
    for (std::size_t i = 0; i < models.size(); ++i) {
        const std::string file = "records_" + sanitize(models[i].name) + ".csv";
        std::ostringstream rec_csv;
        sim::save_records(rec_csv, cmp.records[i]);
        out.add(file, rec_csv.str());
        outputs["records_" + sanitize(models[i].name)] = file;
        summary_csv << models[i].name << ',' << csv::fmt(cmp.summary[i].mean_charge) << ','
                    << csv::fmt(cmp.summary[i].min_charge) << '\n';
        rows.push_back({{"model", models[i].name},
                        {"mean_charge", cmp.summary[i].mean_charge},
                        {"min_charge", cmp.summary[i].min_charge}});
    }
    out.add("compare_summary.csv", summary_csv.str());
    outputs["summary"] = "compare_summary.csv";
    finish(out, "compare", p, outputs, {{"models", rows}});
}

void run_fleet(const FleetParams& p, const fs::path& dir) {
    const fleet::FleetScenario scenario{p.devices, p.power, p.connected, p.duty};
    const double watts = fleet::aggregate_controllable_power_w(scenario);
    const std::string formatted = fleet::format_power(watts);
    std::cout << formatted << "\n";

    OutputSet out(dir);
    finish(out, "fleet", p, json::object(),
           {{"watts", watts}, {"formatted", formatted}});
}

void run_resolution(const ResolutionParams& p, const fs::path& dir) {
    const auto averages = parse_int_list(p.averages, "--averages");
    const auto amplitudes = parse_double_list(p.amplitudes, "--amplitudes");
    signal::SynthSpec spec =
        spec_from(1.0, p.dc, p.noise, p.seed, "", p.bits, p.full_scale);
    freqest::ZeroCrossingConfig cfg;
    cfg.hysteresis_volts = p.hysteresis;
    cfg.timer_tick_s = p.tick;
    cfg.dc_reference_volts = p.reference;
    const auto cells =
        freqest::resolution_study(spec, cfg, averages, amplitudes, p.tone, p.rate,
                                  static_cast<std::size_t>(p.min_estimates));

    std::ostringstream csv_out;
    freqest::save_resolution_table(csv_out, cells);
    OutputSet out(dir);
    out.add("resolution.csv", csv_out.str());
    finish(out, "resolution", p,
           {{"resolution", "resolution.csv"}},
           {{"cells", cells.size()}});
}

void run_trace(const TraceParams& p, const fs::path& dir) {
    const auto trace =
        sim::synth_grid_trace(p.duration, p.dt, p.mean, p.reversion, p.volatility, p.seed);
    std::ostringstream csv_out;
    signal::save_trace(csv_out, trace);
    OutputSet out(dir);
    out.add("trace.csv", csv_out.str());
    finish(out, "trace", p,
           {{"trace", "trace.csv"}},
           {{"points", trace.points.size()}});
}

void run_replay(const std::string& manifest_path, const fs::path& dir) {
    std::ifstream in(manifest_path);
    if (!in) throw InputError("cannot open manifest '" + manifest_path + "'");
    json m;
    try {
        m = json::parse(in);
    } catch (const json::exception& e) {
        throw InputError("malformed manifest: " + std::string(e.what()));
    }
    if (!m.contains("command") || !m.contains("params"))
        throw InputError("manifest missing 'command' or 'params'");
    const std::string command = m["command"];
    const json& params = m["params"];
    try {
        if (command == "synth") run_synth(params.get<SynthParams>(), dir);
        else if (command == "estimate") run_estimate(params.get<EstimateParams>(), dir);
        else if (command == "detect") run_detect(params.get<DetectParams>(), dir);
        else if (command == "simulate") run_simulate(params.get<SimulateParams>(), dir);
        else if (command == "sweep") run_sweep(params.get<SweepParams>(), dir);
        else if (command == "compare") run_compare(params.get<CompareParams>(), dir);
        else if (command == "fleet") run_fleet(params.get<FleetParams>(), dir);
        else if (command == "resolution") run_resolution(params.get<ResolutionParams>(), dir);
        else if (command == "trace") run_trace(params.get<TraceParams>(), dir);
        else throw InputError("manifest names unknown command '" + command + "'");
    } catch (const json::exception& e) {
        throw InputError("manifest params malformed: " + std::string(e.what()));
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"grid-frequency measurement and smart-charging simulation"};
    app.require_subcommand(1);
    std::string out_dir = ".";

    std::function<void(const fs::path&)> runner;

    auto add_config = [&out_dir](CLI::App* cmd) {
        cmd->add_option("--out", out_dir, "output directory")->capture_default_str();
        cmd->set_config("--config", "", "key=value config file; flags override it");
    };

    {
        auto* cmd = app.add_subcommand("synth", "synthesize a waveform CSV");
        auto p = std::make_shared<SynthParams>();
        cmd->add_option("--freq", p->freq, "tone frequency, Hz")->capture_default_str();
        cmd->add_option("--duration", p->duration, "seconds")->capture_default_str();
        cmd->add_option("--rate", p->rate, "sample rate, Hz")->capture_default_str();
        cmd->add_option("--amplitude", p->amplitude, "fundamental Vpp")->capture_default_str();
        cmd->add_option("--dc", p->dc, "DC offset, volts")->capture_default_str();
        cmd->add_option("--noise", p->noise, "white noise sigma, volts")->capture_default_str();
        cmd->add_option("--seed", p->seed, "noise seed")->capture_default_str();
        cmd->add_option("--harmonics", p->harmonics,
                        "comma list of relative levels for harmonics 2,3,...");
        cmd->add_option("--bits", p->bits, "ADC quantizer bits (0 = off)")->capture_default_str();
        cmd->add_option("--full-scale", p->full_scale, "quantizer range, volts")
            ->capture_default_str();
        cmd->add_option("--trace", p->trace, "FM-render this trace CSV instead of a tone");
        add_config(cmd);
        cmd->callback([p, &runner] { runner = [p](const fs::path& d) { run_synth(*p, d); }; });
    }
    {
        auto* cmd = app.add_subcommand("estimate", "zero-crossing frequency estimation");
        auto p = std::make_shared<EstimateParams>();
        cmd->add_option("--waveform", p->waveform, "input waveform CSV")->required();
        cmd->add_option("--averages", p->averages, "full periods per estimate")
            ->capture_default_str();
        cmd->add_option("--hysteresis", p->hysteresis, "Schmitt offset, volts")
            ->capture_default_str();
        cmd->add_option("--tick", p->tick, "timer tick, seconds (0 = off)")
            ->capture_default_str();
        cmd->add_option("--reference", p->reference, "DC comparator reference, volts")
            ->capture_default_str();
        add_config(cmd);
        cmd->callback([p, &runner] { runner = [p](const fs::path& d) { run_estimate(*p, d); }; });
    }
    {
        auto* cmd = app.add_subcommand("detect", "differential bandpass threshold detector");
        auto p = std::make_shared<DetectParams>();
        cmd->add_option("--waveform", p->waveform, "input waveform CSV")->required();
        cmd->add_option("--threshold", p->threshold, "decision frequency, Hz")
            ->capture_default_str();
        cmd->add_option("--detune", p->detune, "bandpass half-separation, Hz")
            ->capture_default_str();
        cmd->add_option("--order", p->order, "Butterworth order")->capture_default_str();
        cmd->add_option("--prefilter-low", p->prefilter_low, "Hz")->capture_default_str();
        cmd->add_option("--prefilter-high", p->prefilter_high, "Hz")->capture_default_str();
        cmd->add_option("--envelope-lp", p->envelope_lp, "Hz")->capture_default_str();
        cmd->add_option("--final-lp", p->final_lp, "Hz")->capture_default_str();
        cmd->add_option("--settle", p->settle, "settling time, s")->capture_default_str();
        cmd->add_flag("--calibrate,!--no-calibrate", p->calibrate,
                      "calibrate the switching point first")
            ->capture_default_str();
        cmd->add_option("--stride", p->stride, "decimation for decisions.csv")
            ->capture_default_str();
        add_config(cmd);
        cmd->callback([p, &runner] { runner = [p](const fs::path& d) { run_detect(*p, d); }; });
    }
    {
        auto* cmd = app.add_subcommand("simulate", "closed-loop trace/policy/battery run");
        auto p = std::make_shared<SimulateParams>();
        cmd->add_option("--trace", p->trace, "frequency trace CSV")->required();
        cmd->add_option("--model", p->model, "laptop1|laptop2|model file")->capture_default_str();
        cmd->add_option("--policy", p->policy,
                        "hard:thr= | hyst:on=,off= | minsoc:thr=,min= | band:thr=,low=,high=")
            ->capture_default_str();
        cmd->add_option("--dt", p->dt, "step, seconds")->capture_default_str();
        cmd->add_option("--initial-charge", p->initial_charge, "fraction")->capture_default_str();
        add_config(cmd);
        cmd->callback([p, &runner] { runner = [p](const fs::path& d) { run_simulate(*p, d); }; });
    }
    {
        auto* cmd = app.add_subcommand("sweep", "hard-threshold sweep over one trace");
        auto p = std::make_shared<SweepParams>();
        cmd->add_option("--trace", p->trace, "frequency trace CSV")->required();
        cmd->add_option("--model", p->model, "battery model")->capture_default_str();
        cmd->add_option("--thresholds", p->thresholds, "comma list, Hz")->capture_default_str();
        cmd->add_option("--dt", p->dt, "step, seconds")->capture_default_str();
        cmd->add_option("--initial-charge", p->initial_charge, "fraction")->capture_default_str();
        add_config(cmd);
        cmd->callback([p, &runner] { runner = [p](const fs::path& d) { run_sweep(*p, d); }; });
    }
    {
        auto* cmd = app.add_subcommand("compare", "same trace and policy across models");
        auto p = std::make_shared<CompareParams>();
        cmd->add_option("--trace", p->trace, "frequency trace CSV")->required();
        cmd->add_option("--models", p->models, "comma list of models")->capture_default_str();
        cmd->add_option("--policy", p->policy, "policy spec")->capture_default_str();
        cmd->add_option("--dt", p->dt, "step, seconds")->capture_default_str();
        cmd->add_option("--initial-charge", p->initial_charge, "fraction")->capture_default_str();
        add_config(cmd);
        cmd->callback([p, &runner] { runner = [p](const fs::path& d) { run_compare(*p, d); }; });
    }
    {
        auto* cmd = app.add_subcommand("fleet", "aggregate controllable-load arithmetic");
        auto p = std::make_shared<FleetParams>();
        cmd->add_option("--devices", p->devices, "device count")->capture_default_str();
        cmd->add_option("--power", p->power, "watts per charging device")->capture_default_str();
        cmd->add_option("--connected", p->connected, "connected fraction")->capture_default_str();
        cmd->add_option("--duty", p->duty, "charging duty fraction")->capture_default_str();
        add_config(cmd);
        cmd->callback([p, &runner] { runner = [p](const fs::path& d) { run_fleet(*p, d); }; });
    }
    {
        auto* cmd = app.add_subcommand("resolution", "estimator resolution study");
        auto p = std::make_shared<ResolutionParams>();
        cmd->add_option("--tone", p->tone, "study tone, Hz")->capture_default_str();
        cmd->add_option("--rate", p->rate, "sample rate, Hz")->capture_default_str();
        cmd->add_option("--averages", p->averages, "comma list")->capture_default_str();
        cmd->add_option("--amplitudes", p->amplitudes, "comma list, Vpp")->capture_default_str();
        cmd->add_option("--noise", p->noise, "noise sigma, volts")->capture_default_str();
        cmd->add_option("--seed", p->seed, "noise seed")->capture_default_str();
        cmd->add_option("--dc", p->dc, "DC offset, volts")->capture_default_str();
        cmd->add_option("--bits", p->bits, "ADC quantizer bits (0 = off)")->capture_default_str();
        cmd->add_option("--full-scale", p->full_scale, "quantizer range, volts")
            ->capture_default_str();
        cmd->add_option("--hysteresis", p->hysteresis, "Schmitt offset, volts")
            ->capture_default_str();
        cmd->add_option("--tick", p->tick, "timer tick, seconds")->capture_default_str();
        cmd->add_option("--reference", p->reference, "comparator reference, volts")
            ->capture_default_str();
        cmd->add_option("--min-estimates", p->min_estimates, "estimates per cell")
            ->capture_default_str();
        add_config(cmd);
        cmd->callback(
            [p, &runner] { runner = [p](const fs::path& d) { run_resolution(*p, d); }; });
    }
    {
        auto* cmd = app.add_subcommand("trace", "seeded mean-reverting grid-frequency trace");
        auto p = std::make_shared<TraceParams>();
        cmd->add_option("--duration", p->duration, "seconds")->capture_default_str();
        cmd->add_option("--dt", p->dt, "point spacing, seconds")->capture_default_str();
        cmd->add_option("--mean", p->mean, "Hz")->capture_default_str();
        cmd->add_option("--reversion", p->reversion, "mean-reversion rate, 1/s")
            ->capture_default_str();
        cmd->add_option("--volatility", p->volatility, "Hz/sqrt(s)")->capture_default_str();
        cmd->add_option("--seed", p->seed, "process seed")->capture_default_str();
        add_config(cmd);
        cmd->callback([p, &runner] { runner = [p](const fs::path& d) { run_trace(*p, d); }; });
    }
    {
        auto* cmd = app.add_subcommand("replay", "re-run a manifest byte-identically");
        auto path = std::make_shared<std::string>();
        cmd->add_option("--manifest", *path, "manifest.json from a previous run")->required();
        cmd->add_option("--out", out_dir, "output directory")->capture_default_str();
        cmd->callback(
            [path, &runner] { runner = [path](const fs::path& d) { run_replay(*path, d); }; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: usage: " << e.what() << "\n";
        return 2;
    }

    try {
        runner(fs::path(out_dir));
    } catch (const InputError& e) {
        std::cerr << "error: input: " << e.what() << "\n";
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "error: config: " << e.what() << "\n";
        return 4;
    } catch (const NumericalError& e) {
        std::cerr << "error: numerical: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
