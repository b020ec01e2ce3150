// whid: command-line harness for the Wiener-Hammerstein channel estimator.
//
//   whid run <config> --out <dir>
//   whid sweep <config> --bandwidths 1/8,1/32,1/128 --out <dir>
//   whid gradcheck [--trials K]
//   whid baseline <config> [--out <dir>]
//   whid ambiguity <config> [--out <dir>]
//
// Global flags: --seed, --steps, --quiet.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "whid/experiment.hpp"
#include "whid/gradcheck.hpp"

namespace {

struct GlobalFlags {
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> steps;
    bool quiet{false};
};

double parse_bandwidth(const std::string& token) {
    const auto slash = token.find('/');
    std::size_t used = 0;
    if (slash == std::string::npos) {
        const double v = std::stod(token, &used);
        if (used != token.size()) throw std::invalid_argument("bad bandwidth '" + token + "'");
        return v;
    }
    const std::string num = token.substr(0, slash);
    const std::string den = token.substr(slash + 1);
    const double n = std::stod(num, &used);
    if (used != num.size()) throw std::invalid_argument("bad bandwidth '" + token + "'");
    const double d = std::stod(den, &used);
    if (used != den.size() || d == 0.0) throw std::invalid_argument("bad bandwidth '" + token + "'");
    return n / d;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, sep)) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

whid::ExperimentConfig load_with_overrides(const std::string& path, const GlobalFlags& flags,
                                           std::optional<whid::Mode> forced_mode) {
    nlohmann::json doc = whid::read_config_document(path);
    if (forced_mode) {
        if (!doc.is_object()) throw whid::ConfigError("", "config must be a JSON object");
        doc["mode"] = whid::to_string(*forced_mode);
        if (*forced_mode == whid::Mode::LinearBaseline) doc.erase("a_coeffs");
    }
    whid::ExperimentConfig cfg = whid::config_from_json(doc);
    if (flags.seed) cfg.seed = *flags.seed;
    if (flags.steps) cfg.n_steps = *flags.steps;
    whid::validate(cfg);
    return cfg;
}

std::string fmt(double v, int precision = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

void print_result(const whid::RunResult& r) {
    const auto& a = r.ambiguity;
    std::cout << "mode=" << whid::to_string(r.config.mode) << " N=" << r.config.channel_length
              << " B=" << r.config.B << " steps=" << r.config.n_steps << "\n";
    if (const auto f = r.final_mse_db()) std::cout << "  final smoothed MSE: " << fmt(*f, 2) << " dB\n";
    std::cout << "  ambiguity (in band): tau=" << fmt(a.tau) << " alpha_B=" << fmt(a.alpha_B)
              << " alpha_A=" << (a.alpha_A ? fmt(*a.alpha_A) : "n/a") << "\n";
    std::cout << "  misalignment L: " << fmt(r.misalignment_L_db, 2) << " dB (in band "
              << fmt(r.misalignment_L_inband_db, 2) << " dB)\n";
    std::cout << "  misalignment O: " << fmt(r.misalignment_O_db, 2) << " dB (in band "
              << fmt(r.misalignment_O_inband_db, 2) << " dB)\n";
    if (r.product_relation) {
        std::cout << "  product relation max deviation: " << fmt(*r.product_relation) << "\n";
    }
    if (r.multifreq_relation) {
        std::cout << "  multi-frequency relation max residual: " << fmt(*r.multifreq_relation)
                  << "\n";
    }
    if (r.rescale) {
        std::cout << "  power rescale: factor=" << fmt(r.rescale->factor)
                  << " alpha_B after=" << fmt(r.rescale->ambiguity.alpha_B) << "\n";
    }
    std::cout << "  wall time: " << fmt(r.wall_time_s, 2) << " s\n";
}

void finish(const whid::RunResult& r, const std::string& out_dir, const GlobalFlags& flags) {
    if (!out_dir.empty()) whid::emit_outputs(r, out_dir);
    if (!flags.quiet) print_result(r);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wiener-Hammerstein channel estimation harness"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalFlags flags;
    std::uint64_t seed_value = 0;
    std::uint64_t steps_value = 0;
    auto* seed_opt = app.add_option("--seed", seed_value, "Override the experiment seed");
    auto* steps_opt = app.add_option("--steps", steps_value, "Override the number of LMS steps");
    app.add_flag("--quiet", flags.quiet, "Suppress the printed summary");

    std::string config_path;
    std::string out_dir;

    auto* run = app.add_subcommand("run", "Run one experiment and write its data files");
    run->add_option("config", config_path, "JSON config file")->required();
    run->add_option("--out", out_dir, "Output directory")->required();

    std::string bandwidths = "1/8,1/32,1/128";
    auto* sweep = app.add_subcommand("sweep", "One experiment per observation bandwidth");
    sweep->add_option("config", config_path, "JSON config file")->required();
    sweep->add_option("--bandwidths", bandwidths, "Comma-separated B values (fractions allowed)");
    sweep->add_option("--out", out_dir, "Output directory")->required();

    int trials = 100;
    auto* gradcheck = app.add_subcommand("gradcheck", "Analytic vs finite-difference gradients");
    gradcheck->add_option("--trials", trials, "Number of random configurations")
        ->check(CLI::PositiveNumber);

    auto* baseline = app.add_subcommand("baseline", "Linear-only chain (no uncoupling block)");
    baseline->add_option("config", config_path, "JSON config file")->required();
    baseline->add_option("--out", out_dir, "Output directory");

    auto* ambiguity =
        app.add_subcommand("ambiguity", "Quadratic-only low-power run with power rescaling");
    ambiguity->add_option("config", config_path, "JSON config file")->required();
    ambiguity->add_option("--out", out_dir, "Output directory");

    CLI11_PARSE(app, argc, argv);
    if (*seed_opt) flags.seed = seed_value;
    if (*steps_opt) flags.steps = steps_value;

    try {
        if (*run) {
            finish(whid::run_experiment(load_with_overrides(config_path, flags, std::nullopt)),
                   out_dir, flags);
        } else if (*sweep) {
            const auto cfg = load_with_overrides(config_path, flags, std::nullopt);
            std::vector<double> values;
            const auto tokens = split(bandwidths, ',');
            for (const auto& t : tokens) values.push_back(parse_bandwidth(t));
            if (values.empty()) throw std::invalid_argument("no bandwidths given");
            const auto results = whid::run_sweep(cfg, values);
            for (std::size_t i = 0; i < results.size(); ++i) {
                std::string name = tokens[i];
                for (char& ch : name) {
                    if (ch == '/') ch = '_';
                }
                finish(results[i], (std::filesystem::path(out_dir) / ("B_" + name)).string(), flags);
            }
        } else if (*gradcheck) {
            whid::GradCheckOptions opts;
            opts.trials = trials;
            if (flags.seed) opts.seed = *flags.seed;
            const auto summary = whid::run_gradient_check(opts);
            if (!flags.quiet) {
                std::cout << "gradcheck: " << summary.trials - summary.failures << "/"
                          << summary.trials << " passed, worst relative error "
                          << summary.worst_relative_error << " (tolerance " << opts.rel_tolerance
                          << ")\n";
            }
            return summary.passed() ? 0 : 1;
        } else if (*baseline) {
            finish(whid::run_experiment(
                       load_with_overrides(config_path, flags, whid::Mode::LinearBaseline)),
                   out_dir, flags);
        } else if (*ambiguity) {
            finish(whid::run_experiment(
                       load_with_overrides(config_path, flags, whid::Mode::QuadraticLowPower)),
                   out_dir, flags);
        }
    } catch (const whid::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const whid::DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
