#pragma once

// Seeded experiment harness: declarative JSON configs, streaming runs of
// plant + estimator, post-run analysis and deterministic CSV/JSON output.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "whid/analysis.hpp"
#include "whid/estimator.hpp"
#include "whid/plant.hpp"
#include "whid/rng.hpp"
#include "whid/signals.hpp"

namespace whid {

enum class Mode { Nonlinear, LinearBaseline, QuadraticLowPower };

inline std::string to_string(Mode mode) {
    switch (mode) {
        case Mode::Nonlinear: return "nonlinear";
        case Mode::LinearBaseline: return "linear-baseline";
        case Mode::QuadraticLowPower: return "quadratic-only-lowpower";
    }
    return "nonlinear";
}

inline std::optional<Mode> parse_mode(const std::string& text) {
    if (text == "nonlinear") return Mode::Nonlinear;
    if (text == "linear-baseline") return Mode::LinearBaseline;
    if (text == "quadratic-only-lowpower") return Mode::QuadraticLowPower;
    return std::nullopt;
}

/// Configuration problem tied to one field.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field.empty() ? message : "config field '" + field + "': " + message),
          field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

struct ExperimentConfig {
    std::uint64_t seed{1};
    std::uint64_t n_steps{1'000'000};
    int channel_length{256};
    double r{0.4};
    double B{0.125};
    std::map<int, double> a_coeffs{{2, 1.0}, {3, -2.0}};
    double beta{0.1};
    double input_variance{10.0};
    int oversample_factor{3};
    int sinc_half_width{128};
    double ema_decay{0.999};
    int spectrum_grid{1024};
    std::uint64_t emit_every{100};
    Mode mode{Mode::Nonlinear};
    /// Estimated filter lengths; equal to channel_length unless overridden.
    int estimated_length{256};
    double measurement_noise_std{0.0};
    double tau_range{1.0};
    double tau_resolution{0.01};
    int relation_samples{1000};
    int power_samples{100000};

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

namespace detail {

inline const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "seed", "n_steps", "channel_length", "N", "r", "B", "a_coeffs", "beta",
        "input_variance", "oversample_factor", "sinc_half_width", "ema_decay", "spectrum_grid",
        "emit_every", "mode", "estimated_length", "measurement_noise_std", "tau_range",
        "tau_resolution", "relation_samples", "power_samples"};
    return keys;
}

inline double get_number(const nlohmann::json& doc, const std::string& key) {
    const auto& v = doc.at(key);
    if (!v.is_number()) throw ConfigError(key, "expected a number");
    return v.get<double>();
}

inline std::int64_t get_integer(const nlohmann::json& doc, const std::string& key) {
    const auto& v = doc.at(key);
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9.0e15) {
            return static_cast<std::int64_t>(d);
        }
    }
    throw ConfigError(key, "expected an integer");
}

inline void require(bool ok, const std::string& key, const std::string& message) {
    if (!ok) throw ConfigError(key, message);
}

} // namespace detail

/// Checks every field against the module contracts.
inline void validate(const ExperimentConfig& c) {
    using detail::require;
    require(c.channel_length >= 1, "channel_length", "must be >= 1");
    require(std::isfinite(c.r), "r", "must be finite");
    require(std::isfinite(c.B) && c.B > 0.0, "B", "must be positive");
    require(std::isfinite(c.beta) && c.beta > 0.0, "beta", "must be positive");
    require(std::isfinite(c.input_variance) && c.input_variance > 0.0, "input_variance",
            "must be positive");
    require(c.oversample_factor >= 1, "oversample_factor", "must be >= 1");
    require(c.sinc_half_width >= 1, "sinc_half_width", "must be >= 1");
    require(c.ema_decay > 0.0 && c.ema_decay < 1.0, "ema_decay", "must lie in (0, 1)");
    require(c.spectrum_grid >= 2, "spectrum_grid", "must be >= 2");
    require(c.emit_every >= 1, "emit_every", "must be >= 1");
    require(c.estimated_length >= 1, "estimated_length", "must be >= 1");
    require(std::isfinite(c.measurement_noise_std) && c.measurement_noise_std >= 0.0,
            "measurement_noise_std", "must be >= 0");
    require(std::isfinite(c.tau_range) && c.tau_range >= 0.0, "tau_range", "must be >= 0");
    require(std::isfinite(c.tau_resolution) && c.tau_resolution > 0.0, "tau_resolution",
            "must be positive");
    require(c.relation_samples >= 1, "relation_samples", "must be >= 1");
    require(c.power_samples >= static_cast<int>(kMinPowerSamples), "power_samples",
            "must be >= " + std::to_string(kMinPowerSamples));
    for (const auto& [q, a] : c.a_coeffs) {
        require(q >= 1, "a_coeffs", "orders must be >= 1");
        require(std::isfinite(a), "a_coeffs", "coefficients must be finite");
    }
    bool any = false;
    bool nonlinear = false;
    for (const auto& [q, a] : c.a_coeffs) {
        any = any || a != 0.0;
        nonlinear = nonlinear || (q > 1 && a != 0.0);
    }
    require(any, "a_coeffs", "at least one coefficient must be nonzero");
    if (c.mode != Mode::LinearBaseline) {
        require(nonlinear, "a_coeffs", "needs a nonzero coefficient of order > 1");
    }
}

/// Builds a config from a parsed JSON object. Absent keys take the
/// reference values (N = 256, r = 0.4, B = 1/8, a = {2: 1, 3: -2},
/// beta = 0.1, variance 10); the mode shifts some of those defaults:
///   linear-baseline          a = {1: 1}
///   quadratic-only-lowpower  a = {2: 1}, variance 1, 4e6 steps
/// sinc_half_width and estimated_length follow the channel length when absent.
inline ExperimentConfig config_from_json(const nlohmann::json& doc) {
    using detail::get_integer;
    using detail::get_number;
    if (!doc.is_object()) throw ConfigError("", "config must be a JSON object");
    for (const auto& [key, value] : doc.items()) {
        const auto& keys = detail::config_keys();
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
            throw ConfigError(key, "unknown field");
        }
    }
    if (doc.contains("N") && doc.contains("channel_length")) {
        throw ConfigError("N", "given together with channel_length");
    }

    ExperimentConfig c;
    if (doc.contains("mode")) {
        const auto& v = doc.at("mode");
        if (!v.is_string()) throw ConfigError("mode", "expected a string");
        const auto mode = parse_mode(v.get<std::string>());
        if (!mode) throw ConfigError("mode", "unknown mode '" + v.get<std::string>() + "'");
        c.mode = *mode;
    }
    if (c.mode == Mode::LinearBaseline) {
        c.a_coeffs = {{1, 1.0}};
    } else if (c.mode == Mode::QuadraticLowPower) {
        c.a_coeffs = {{2, 1.0}};
        c.input_variance = 1.0;
        c.n_steps = 4'000'000;
    }

    auto non_negative = [&](const std::string& key) {
        const auto v = get_integer(doc, key);
        if (v < 0) throw ConfigError(key, "must be >= 0");
        return static_cast<std::uint64_t>(v);
    };
    auto bounded_int = [&](const std::string& key) {
        const auto v = get_integer(doc, key);
        if (v < -2147483647 || v > 2147483647) throw ConfigError(key, "out of range");
        return static_cast<int>(v);
    };

    if (doc.contains("seed")) c.seed = non_negative("seed");
    if (doc.contains("n_steps")) c.n_steps = non_negative("n_steps");
    if (doc.contains("channel_length")) c.channel_length = bounded_int("channel_length");
    if (doc.contains("N")) c.channel_length = bounded_int("N");
    if (doc.contains("r")) c.r = get_number(doc, "r");
    if (doc.contains("B")) c.B = get_number(doc, "B");
    if (doc.contains("beta")) c.beta = get_number(doc, "beta");
    if (doc.contains("input_variance")) c.input_variance = get_number(doc, "input_variance");
    if (doc.contains("oversample_factor")) c.oversample_factor = bounded_int("oversample_factor");
    c.sinc_half_width = std::max(1, c.channel_length / 2);
    if (doc.contains("sinc_half_width")) c.sinc_half_width = bounded_int("sinc_half_width");
    if (doc.contains("ema_decay")) c.ema_decay = get_number(doc, "ema_decay");
    if (doc.contains("spectrum_grid")) c.spectrum_grid = bounded_int("spectrum_grid");
    if (doc.contains("emit_every")) c.emit_every = non_negative("emit_every");
    c.estimated_length = c.channel_length;
    if (doc.contains("estimated_length")) c.estimated_length = bounded_int("estimated_length");
    if (doc.contains("measurement_noise_std")) {
        c.measurement_noise_std = get_number(doc, "measurement_noise_std");
    }
    if (doc.contains("tau_range")) c.tau_range = get_number(doc, "tau_range");
    if (doc.contains("tau_resolution")) c.tau_resolution = get_number(doc, "tau_resolution");
    if (doc.contains("relation_samples")) c.relation_samples = bounded_int("relation_samples");
    if (doc.contains("power_samples")) c.power_samples = bounded_int("power_samples");

    if (doc.contains("a_coeffs")) {
        const auto& a = doc.at("a_coeffs");
        if (!a.is_object()) throw ConfigError("a_coeffs", "expected an object of order -> value");
        c.a_coeffs.clear();
        for (const auto& [key, value] : a.items()) {
            int q = 0;
            std::size_t used = 0;
            try {
                q = std::stoi(key, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != key.size()) {
                throw ConfigError("a_coeffs", "order '" + key + "' is not an integer");
            }
            if (!value.is_number()) throw ConfigError("a_coeffs", "coefficients must be numbers");
            c.a_coeffs[q] = value.get<double>();
        }
    }
    validate(c);
    return c;
}

/// Reads a config file into a JSON document without interpreting it.
inline nlohmann::json read_config_document(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("", "cannot parse " + path.string() + ": " + e.what());
    }
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    return config_from_json(read_config_document(path));
}

inline nlohmann::ordered_json config_to_json(const ExperimentConfig& c) {
    nlohmann::ordered_json a = nlohmann::ordered_json::object();
    for (const auto& [q, v] : c.a_coeffs) a[std::to_string(q)] = v;
    nlohmann::ordered_json j;
    j["seed"] = c.seed;
    j["n_steps"] = c.n_steps;
    j["mode"] = to_string(c.mode);
    j["channel_length"] = c.channel_length;
    j["r"] = c.r;
    j["B"] = c.B;
    j["a_coeffs"] = a;
    j["beta"] = c.beta;
    j["input_variance"] = c.input_variance;
    j["oversample_factor"] = c.oversample_factor;
    j["sinc_half_width"] = c.sinc_half_width;
    j["ema_decay"] = c.ema_decay;
    j["spectrum_grid"] = c.spectrum_grid;
    j["emit_every"] = c.emit_every;
    j["estimated_length"] = c.estimated_length;
    j["measurement_noise_std"] = c.measurement_noise_std;
    j["tau_range"] = c.tau_range;
    j["tau_resolution"] = c.tau_resolution;
    j["relation_samples"] = c.relation_samples;
    j["power_samples"] = c.power_samples;
    return j;
}

struct TracePoint {
    std::uint64_t step;
    double mse_db;

    friend bool operator==(const TracePoint&, const TracePoint&) = default;
};

/// Outcome of the mean-power correction of the channel estimate.
struct RescaleResult {
    double target_power;
    double factor;
    FirFilter L_rescaled;
    AmbiguityEstimate ambiguity;
};

struct RunResult {
    ExperimentConfig config;
    std::vector<TracePoint> mse_trace;
    FirFilter L_true;
    FirFilter O_true;
    FirFilter L_est;
    FirFilter O_est;
    /// Band-restricted fit; used for every compensated metric.
    AmbiguityEstimate ambiguity;
    /// Fit on the raw time samples.
    AmbiguityEstimate ambiguity_time_domain;
    double misalignment_L_db{0.0};
    double misalignment_O_db{0.0};
    double misalignment_L_inband_db{0.0};
    double misalignment_O_inband_db{0.0};
    std::optional<double> product_relation;
    std::optional<double> multifreq_relation;
    double output_power{0.0};
    std::optional<RescaleResult> rescale;
    double band_L{kPi};
    double band_O{kPi};
    double wall_time_s{0.0};

    /// Trace value at the first recorded step >= `step`.
    std::optional<double> mse_at(std::uint64_t step) const {
        for (const auto& p : mse_trace) {
            if (p.step >= step) return p.mse_db;
        }
        return std::nullopt;
    }

    std::optional<double> final_mse_db() const {
        if (mse_trace.empty()) return std::nullopt;
        return mse_trace.back().mse_db;
    }
};

inline PolynomialNonlinearity nonlinearity_of(const ExperimentConfig& c) {
    return PolynomialNonlinearity::from_orders(c.a_coeffs);
}

/// Seed streams derived from the experiment seed.
enum class SeedStream : std::uint64_t { Input = 1, MeasurementNoise = 2, PowerProbe = 3, Relation = 4 };

inline std::uint64_t stream_seed(const ExperimentConfig& c, SeedStream s) {
    return derive_seed(c.seed, static_cast<std::uint64_t>(s));
}

/// Builds the plant and estimator, streams n_steps samples, then analyses
/// the final estimates. Deterministic in the config. Estimator divergence
/// propagates as DivergenceError.
inline RunResult run_experiment(const ExperimentConfig& config) {
    validate(config);
    const auto started = std::chrono::steady_clock::now();

    RunResult result;
    result.config = config;
    const auto nl = nonlinearity_of(config);
    result.L_true = make_interest_channel(config.channel_length, config.r);
    result.O_true = make_observation_channel(config.channel_length, config.B);

    Plant plant(PlantConfig{result.L_true, result.O_true, nl, config.measurement_noise_std,
                            stream_seed(config, SeedStream::MeasurementNoise)});
    const NoiseSpec noise{config.input_variance, config.oversample_factor, config.sinc_half_width,
                          0.0};
    OversampledNoiseSource source(noise, stream_seed(config, SeedStream::Input));
    const auto taps = static_cast<std::size_t>(config.estimated_length);
    Estimator estimator =
        Estimator::kronecker(taps, taps, nl, EstimatorOptions{config.beta, config.ema_decay});

    double power_acc = 0.0;
    std::uint64_t power_count = 0;
    const auto settle = static_cast<std::uint64_t>(config.channel_length);
    for (std::uint64_t n = 1; n <= config.n_steps; ++n) {
        const double x = source.next();
        const PlantSample p = plant.step(x);
        const StepReport report = estimator.step(x, p.z);
        if (n > settle) {
            power_acc += p.y * p.y;
            ++power_count;
        }
        if (n % config.emit_every == 0 && report.mse_db) {
            result.mse_trace.push_back({n, *report.mse_db});
        }
    }
    result.L_est = estimator.L_hat();
    result.O_est = estimator.O_hat();
    result.output_power = power_count > 0 ? power_acc / static_cast<double>(power_count) : 0.0;

    // Only |Omega| < pi/Q carries input energy; the nonlinearity spreads
    // what reaches the observation channel over degree * pi/Q.
    const double q_os = static_cast<double>(config.oversample_factor);
    result.band_L = kPi / q_os;
    result.band_O = std::min(kPi, static_cast<double>(nl.degree()) * kPi / q_os);

    const std::size_t grid = static_cast<std::size_t>(config.spectrum_grid);
    result.ambiguity =
        estimate_ambiguity_inband(result.L_true, result.L_est, result.O_true, result.O_est,
                                  result.band_L, result.band_O, config.tau_range,
                                  config.tau_resolution, grid);
    result.ambiguity_time_domain =
        estimate_ambiguity(result.L_true, result.L_est, result.O_true, result.O_est,
                           config.tau_range, config.tau_resolution);

    AmbiguityEstimate obs_comp{-result.ambiguity.tau, result.ambiguity.alpha_A.value_or(1.0),
                               std::nullopt, 0.0};
    result.misalignment_L_db = misalignment_db(result.L_true, result.L_est, result.ambiguity);
    result.misalignment_O_db = misalignment_db(result.O_true, result.O_est, obs_comp);
    result.misalignment_L_inband_db = misalignment_db_inband(
        result.L_true, result.L_est, result.ambiguity, result.band_L, grid);
    result.misalignment_O_inband_db =
        misalignment_db_inband(result.O_true, result.O_est, obs_comp, result.band_O, grid);

    if (config.mode == Mode::LinearBaseline) {
        ProductRelationOptions opts;
        opts.grid_size = grid;
        opts.omega_limit = result.band_L;
        result.product_relation =
            check_product_relation(result.L_true, result.O_true, result.L_est, result.O_est, opts);
    } else {
        MultifreqOptions opts;
        opts.sample_count = static_cast<std::size_t>(config.relation_samples);
        opts.oversample_factor = config.oversample_factor;
        opts.seed = stream_seed(config, SeedStream::Relation);
        result.multifreq_relation = check_multifreq_relation(result.L_true, result.O_true,
                                                             result.L_est, result.O_est, nl, opts);
    }

    if (config.mode == Mode::QuadraticLowPower && result.output_power > 0.0) {
        OversampledNoiseSource probe(noise, stream_seed(config, SeedStream::PowerProbe));
        Signal input(static_cast<std::size_t>(config.power_samples));
        for (double& v : input) v = probe.next();
        RescaleResult rescale;
        rescale.target_power = result.output_power;
        rescale.L_rescaled = power_rescale(result.L_est, input, result.output_power);
        rescale.factor = std::sqrt(rescale.L_rescaled.energy() / result.L_est.energy());
        // alpha_A is carried by O_hat and is untouched by the rescaling.
        rescale.ambiguity = estimate_ambiguity_inband(
            result.L_true, rescale.L_rescaled, result.O_true, result.O_est, result.band_L,
            result.band_O, config.tau_range, config.tau_resolution, grid);
        result.rescale = std::move(rescale);
    }

    result.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
}

/// One run per bandwidth, executed concurrently. Results are in input order
/// and do not depend on scheduling.
inline std::vector<RunResult> run_sweep(const ExperimentConfig& base,
                                        const std::vector<double>& bandwidths,
                                        bool parallel = true) {
    std::vector<ExperimentConfig> configs;
    for (double b : bandwidths) {
        ExperimentConfig c = base;
        c.B = b;
        validate(c);
        configs.push_back(c);
    }
    std::vector<RunResult> out;
    if (!parallel) {
        for (const auto& c : configs) out.push_back(run_experiment(c));
        return out;
    }
    std::vector<std::future<RunResult>> jobs;
    for (const auto& c : configs) {
        jobs.push_back(std::async(std::launch::async, [c] { return run_experiment(c); }));
    }
    for (auto& j : jobs) out.push_back(j.get());
    return out;
}

// ---------------------------------------------------------------------------
// Output files

struct EmitOptions {
    /// Wall time varies between runs; leave it out for byte-identical output.
    bool include_wall_time{false};
};

/// Shortest "%.17g" rendering: round-trips every double exactly.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline nlohmann::ordered_json summary_json(const RunResult& r, const EmitOptions& options = {}) {
    auto opt = [](const std::optional<double>& v) {
        return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json();
    };
    auto amb = [&](const AmbiguityEstimate& a) {
        nlohmann::ordered_json j;
        j["tau"] = a.tau;
        j["alpha_B"] = a.alpha_B;
        j["alpha_A"] = opt(a.alpha_A);
        j["residual"] = a.residual;
        if (a.alpha_A) {
            nlohmann::ordered_json products = nlohmann::ordered_json::object();
            for (const auto& [q, coeff] : r.config.a_coeffs) {
                if (coeff != 0.0) {
                    products[std::to_string(q)] = *a.alpha_A * std::pow(a.alpha_B, q);
                }
            }
            j["alpha_A_times_alpha_B_pow_q"] = products;
        }
        return j;
    };
    nlohmann::ordered_json j;
    j["config"] = config_to_json(r.config);
    j["ambiguity"] = amb(r.ambiguity);
    j["ambiguity_time_domain"] = amb(r.ambiguity_time_domain);
    nlohmann::ordered_json m;
    m["misalignment_L_db"] = r.misalignment_L_db;
    m["misalignment_O_db"] = r.misalignment_O_db;
    m["misalignment_L_inband_db"] = r.misalignment_L_inband_db;
    m["misalignment_O_inband_db"] = r.misalignment_O_inband_db;
    m["band_L"] = r.band_L;
    m["band_O"] = r.band_O;
    m["product_relation"] = opt(r.product_relation);
    m["multifreq_relation"] = opt(r.multifreq_relation);
    m["output_power"] = r.output_power;
    m["trace_points"] = r.mse_trace.size();
    m["final_mse_db"] = opt(r.final_mse_db());
    j["residuals"] = m;
    if (r.rescale) {
        nlohmann::ordered_json s;
        s["target_power"] = r.rescale->target_power;
        s["factor"] = r.rescale->factor;
        s["ambiguity"] = amb(r.rescale->ambiguity);
        j["power_rescale"] = s;
    }
    if (options.include_wall_time) j["wall_time_s"] = r.wall_time_s;
    return j;
}

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

} // namespace detail

inline std::string mse_trace_csv(const std::vector<TracePoint>& trace) {
    std::string out = "step,mse_db\n";
    for (const auto& p : trace) {
        out += std::to_string(p.step);
        out += ',';
        out += format_double(p.mse_db);
        out += '\n';
    }
    return out;
}

inline std::string spectra_csv(const RunResult& r) {
    const auto grid = static_cast<std::size_t>(r.config.spectrum_grid);
    const Spectrum lt = dtft_eval(r.L_true, grid);
    const Spectrum le = dtft_eval(r.L_est, grid);
    const Spectrum ot = dtft_eval(r.O_true, grid);
    const Spectrum oe = dtft_eval(r.O_est, grid);
    std::string out =
        "omega,omega_over_pi,mag2_db_L_true,mag2_db_L_est,mag2_db_O_true,mag2_db_O_est\n";
    for (std::size_t k = 0; k < grid; ++k) {
        out += format_double(lt.omega[k]) + ',' + format_double(lt.omega[k] / kPi) + ',' +
               format_double(mag2_db(lt.values[k])) + ',' + format_double(mag2_db(le.values[k])) +
               ',' + format_double(mag2_db(ot.values[k])) + ',' +
               format_double(mag2_db(oe.values[k])) + '\n';
    }
    return out;
}

/// Parses a mse_trace.csv document back into trace points.
inline std::vector<TracePoint> parse_mse_trace_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "step,mse_db") {
        throw std::runtime_error("mse_trace.csv: missing header");
    }
    std::vector<TracePoint> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw std::runtime_error("mse_trace.csv: bad row " + line);
        out.push_back({std::stoull(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
    }
    return out;
}

/// Writes mse_trace.csv, spectra.csv and summary.json into out_dir.
inline std::vector<std::filesystem::path> emit_outputs(const RunResult& result,
                                                       const std::filesystem::path& out_dir,
                                                       const EmitOptions& options = {}) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());
    const std::vector<std::filesystem::path> files = {
        out_dir / "mse_trace.csv", out_dir / "spectra.csv", out_dir / "summary.json"};
    detail::write_file(files[0], mse_trace_csv(result.mse_trace));
    detail::write_file(files[1], spectra_csv(result));
    detail::write_file(files[2], summary_json(result, options).dump(2) + "\n");
    return files;
}

} // namespace whid
