#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "msub/msub.hpp"

namespace {

enum Exit { ok = 0, config_failure = 2, data_failure = 3, numerical_failure = 4 };

std::map<std::string, double> parse_assignments(const std::vector<std::string>& items) {
    std::map<std::string, double> out;
    for (const auto& item : items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) throw msub::config_error("expected name=value, got '" + item + "'");
        const std::string name = item.substr(0, eq), text = item.substr(eq + 1);
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (text.empty() || ec != std::errc() || ptr != text.data() + text.size())
            throw msub::config_error("invalid number in '" + item + "'");
        out[name] = v;
    }
    return out;
}

msub::ModelParams model_params(const std::string& model, const std::vector<std::string>& params) {
    const msub::Model m = msub::model_from_string(model);
    try {
        return msub::ModelParams::from_named(m, parse_assignments(params));
    } catch (const msub::domain_error& e) {
        throw msub::config_error(e.what());
    }
}

void emit_json(const msub::json& j, const std::string& path) {
    if (path.empty()) {
        std::cout << j.dump(2) << '\n';
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw msub::data_error("cannot write " + path);
    out << j.dump(2) << '\n';
}

struct Options {
    std::string config, model, input, transform = "raw", report, density, output;
    std::vector<std::string> params, fixed;
    std::uint64_t seed = 1;
    std::size_t n = 10000, grid_size = std::size_t{1} << 14;
    int restarts = 16, max_evals = 4000;
    double span = msub::nan;
};

int run_fit(const Options& o, const CLI::App& cmd) {
    msub::RunConfig cfg;
    if (!o.config.empty()) cfg = msub::load_run_config(o.config);
    if (cmd.count("--model")) cfg.model = msub::model_from_string(o.model);
    if (cmd.count("--input")) cfg.input = o.input;
    if (cmd.count("--transform")) cfg.transform = msub::transform_from_string(o.transform);
    if (cmd.count("--seed")) cfg.seed = o.seed;
    if (cmd.count("--report")) cfg.report_path = o.report;
    if (cmd.count("--density")) cfg.density_path = o.density;
    if (cmd.count("--restarts")) cfg.ecf.restarts = o.restarts;
    if (cmd.count("--max-evals")) cfg.ecf.max_evals = o.max_evals;
    if (cmd.count("--grid-size")) cfg.fft.grid_size = o.grid_size;
    for (const auto& [k, v] : parse_assignments(o.fixed)) cfg.fixed[k] = v;
    if (cfg.model == msub::Model::normal && !cmd.count("--model") && o.config.empty())
        throw msub::config_error("fit: --model is required");
    const msub::Report r = msub::run_fit(cfg);
    if (cfg.report_path.empty())
        std::cout << msub::to_json(r).dump(2) << '\n';
    else
        msub::write_report(cfg.report_path, r);
    return ok;
}

int run_simulate(const Options& o) {
    const msub::ModelParams p = model_params(o.model, o.params);
    if (o.n < 1) throw msub::config_error("simulate: --n must be at least 1");
    const std::vector<double> x = msub::model_sample(p, o.n, o.seed);
    const auto dates = msub::synthetic_dates(x.size());
    if (o.output.empty())
        msub::write_series(std::cout, dates, x);
    else
        msub::write_series(o.output, dates, x);
    return ok;
}

int run_density(const Options& o, const CLI::App& cmd) {
    const msub::ModelParams p = model_params(o.model, o.params);
    if (o.output.empty()) throw msub::config_error("density: --output is required");
    msub::FFTConfig fft;
    fft.grid_size = o.grid_size;
    if (cmd.count("--span")) fft.x_span = o.span;
    try {
        fft.validate();
    } catch (const msub::domain_error& e) {
        throw msub::config_error(e.what());
    }
    std::vector<double> data;
    if (!o.input.empty()) data = msub::ingest(o.input, msub::transform_from_string(o.transform)).values;
    msub::detail::stage("density", [&] { return msub::emit_density(p, fft, o.output, data); });
    return ok;
}

int run_diagnose(const Options& o) {
    const msub::ModelParams p = model_params(o.model, o.params);
    if (o.input.empty()) throw msub::config_error("diagnose: --input is required");
    const auto series = msub::ingest(o.input, msub::transform_from_string(o.transform));
    const auto tests = msub::detail::stage("diagnostics", [&] {
        return msub::density_forecast_tests(p, series.values, msub::FFTConfig{});
    });
    msub::json out = {{"schema", 1}, {"command", "diagnose"}, {"model", o.model}, {"n", series.count()}};
    msub::json arr = msub::json::array();
    for (const auto& t : tests)
        arr.push_back({{"method", t.method}, {"statistic", t.statistic}, {"p_value", t.p_value}, {"n", t.n}});
    out["diagnostics"] = arr;
    emit_json(out, o.report);
    return ok;
}

int run_moments(const Options& o) {
    const msub::ModelParams p = model_params(o.model, o.params);
    std::vector<double> data;
    if (!o.input.empty()) data = msub::ingest(o.input, msub::transform_from_string(o.transform)).values;
    const auto table = msub::detail::stage("moments", [&] { return msub::emit_moment_table(p, data); });
    msub::json out = {{"schema", 1}, {"command", "moments"}, {"model", o.model}, {"params", p.named()}};
    out["moments"] = msub::moment_table_json(table);
    emit_json(out, o.report);
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiple-subordinated Levy return models: fitting, simulation, densities and diagnostics"};
    app.set_version_flag("--version", std::string(msub::version));
    app.require_subcommand(1);
    Options o;

    auto* fit = app.add_subcommand("fit", "Estimate a model from a date,value CSV and write a JSON report");
    fit->add_option("--config", o.config, "JSON run configuration; flags override its values");
    fit->add_option("--model", o.model, "normal | ig | cig | ncig | vgg");
    fit->add_option("--input", o.input, "Input CSV with header date,value");
    fit->add_option("--transform", o.transform, "log-return | square | raw");
    fit->add_option("--seed", o.seed, "Master seed for the multi-start search");
    fit->add_option("--fix", o.fixed, "Hold a parameter fixed, name=value (repeatable)");
    fit->add_option("--report", o.report, "Report path (default: stdout)");
    fit->add_option("--density", o.density, "Also write the fitted density table here");
    fit->add_option("--restarts", o.restarts, "Number of optimizer starts");
    fit->add_option("--max-evals", o.max_evals, "Objective evaluations per start");
    fit->add_option("--grid-size", o.grid_size, "FFT grid size (power of two)");

    auto* sim = app.add_subcommand("simulate", "Draw unit-time observations from a model");
    sim->add_option("--model", o.model, "normal | ig | cig | ncig | vgg")->required();
    sim->add_option("--param", o.params, "Model parameter, name=value (repeatable)");
    sim->add_option("--n", o.n, "Number of draws");
    sim->add_option("--seed", o.seed, "Seed");
    sim->add_option("--output", o.output, "Output CSV (default: stdout)");

    auto* dens = app.add_subcommand("density", "Tabulate x,pdf,cdf by FFT inversion of the model chf");
    dens->add_option("--model", o.model, "normal | ig | cig | ncig | vgg")->required();
    dens->add_option("--param", o.params, "Model parameter, name=value (repeatable)");
    dens->add_option("--output", o.output, "Output CSV")->required();
    dens->add_option("--grid-size", o.grid_size, "FFT grid size (power of two)");
    dens->add_option("--span", o.span, "Half-width of the support");
    dens->add_option("--input", o.input, "Optional data CSV for a kernel density overlay");
    dens->add_option("--transform", o.transform, "Transform applied to --input");

    auto* diag = app.add_subcommand("diagnose", "PIT uniformity and normality tests of a model against data");
    diag->add_option("--model", o.model, "normal | ig | cig | ncig | vgg")->required();
    diag->add_option("--param", o.params, "Model parameter, name=value (repeatable)");
    diag->add_option("--input", o.input, "Input CSV with header date,value")->required();
    diag->add_option("--transform", o.transform, "log-return | square | raw");
    diag->add_option("--report", o.report, "Output JSON (default: stdout)");

    auto* mom = app.add_subcommand("moments", "Model moments, optionally next to sample moments");
    mom->add_option("--model", o.model, "normal | ig | cig | ncig | vgg")->required();
    mom->add_option("--param", o.params, "Model parameter, name=value (repeatable)");
    mom->add_option("--input", o.input, "Optional data CSV");
    mom->add_option("--transform", o.transform, "Transform applied to --input");
    mom->add_option("--report", o.report, "Output JSON (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_failure;
    }

    try {
        if (*fit) return run_fit(o, *fit);
        if (*sim) return run_simulate(o);
        if (*dens) return run_density(o, *dens);
        if (*diag) return run_diagnose(o);
        if (*mom) return run_moments(o);
    } catch (const msub::config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return config_failure;
    } catch (const msub::data_error& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return data_failure;
    } catch (const msub::domain_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return config_failure;
    } catch (const msub::error& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return numerical_failure;
    }
    return ok;
}
