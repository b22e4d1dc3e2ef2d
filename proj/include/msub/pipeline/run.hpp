#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "msub/core.hpp"
#include "msub/diagnostics.hpp"
#include "msub/estimation.hpp"
#include "msub/numerics/kde.hpp"
#include "msub/numerics/stats.hpp"
#include "msub/pipeline/report.hpp"
#include "msub/pipeline/series.hpp"

namespace msub {

struct RunConfig {
    Model model = Model::normal;
    std::string input;
    Transform transform = Transform::raw;
    ECFConfig ecf;
    FFTConfig fft;
    std::uint64_t seed = 1;
    std::map<std::string, double> fixed;
    std::string report_path;
    std::string density_path;

    void validate() const {
        if (input.empty()) throw config_error("no input file given");
        {
            std::ifstream probe(input);
            if (!probe) throw config_error("input file does not exist: " + input);
        }
        for (const auto& [name, v] : fixed) {
            (void)v;
            if (!ModelParams::index_of(model, name))
                throw config_error("unknown fixed parameter '" + name + "' for model " + to_string(model));
        }
        try {
            ecf.validate();
            fft.validate();
        } catch (const domain_error& e) {
            throw config_error(e.what());
        }
    }

    /// Settings that determine the result; output paths are left out.
    json canonical() const {
        json fx = json::object();
        for (const auto& [k, v] : fixed) fx[k] = format_double(v);
        return {{"model", to_string(model)},
                {"transform", to_string(transform)},
                {"seed", seed},
                {"fixed", fx},
                {"ecf",
                 {{"points", ecf.points},
                  {"span", format_double(ecf.span)},
                  {"weight", ecf.weight == EcfWeight::gaussian ? "gaussian" : "uniform"},
                  {"max_evals", ecf.max_evals},
                  {"restarts", ecf.restarts},
                  {"tol", format_double(ecf.tol)}}},
                {"fft", {{"grid_size", fft.grid_size}, {"x_span", format_double(fft.x_span)}}}};
    }
};

/// Reads a JSON config; keys mirror the RunConfig fields, nested "ecf" and "fft" objects.
inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw config_error(path + ": " + e.what());
    }
    RunConfig c;
    try {
        if (j.contains("model")) c.model = model_from_string(j["model"].get<std::string>());
        if (j.contains("input")) c.input = j["input"].get<std::string>();
        if (j.contains("transform")) c.transform = transform_from_string(j["transform"].get<std::string>());
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("report")) c.report_path = j["report"].get<std::string>();
        if (j.contains("density")) c.density_path = j["density"].get<std::string>();
        if (j.contains("fixed"))
            for (const auto& [k, v] : j["fixed"].items()) c.fixed[k] = v.get<double>();
        if (j.contains("ecf")) {
            const auto& e = j["ecf"];
            c.ecf.points = e.value("points", c.ecf.points);
            c.ecf.span = e.value("span", c.ecf.span);
            c.ecf.max_evals = e.value("max_evals", c.ecf.max_evals);
            c.ecf.restarts = e.value("restarts", c.ecf.restarts);
            c.ecf.tol = e.value("tol", c.ecf.tol);
            const std::string w = e.value("weight", std::string("gaussian"));
            if (w == "gaussian")
                c.ecf.weight = EcfWeight::gaussian;
            else if (w == "uniform")
                c.ecf.weight = EcfWeight::uniform;
            else
                throw config_error("unknown ecf weight '" + w + "'");
        }
        if (j.contains("fft")) {
            const auto& f = j["fft"];
            c.fft.grid_size = f.value("grid_size", c.fft.grid_size);
            if (f.contains("x_span")) c.fft.x_span = f["x_span"].get<double>();
        }
    } catch (const json::exception& e) {
        throw config_error(path + ": " + e.what());
    }
    return c;
}

namespace detail {
/// Runs one pipeline stage, prefixing errors with the stage name. Domain errors raised inside
/// numerical stages are reported as numerical failures.
template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
    const std::string tag = std::string(name) + ": ";
    try {
        return f();
    } catch (const config_error& e) {
        throw config_error(tag + e.what());
    } catch (const data_error& e) {
        throw data_error(tag + e.what());
    } catch (const error& e) {
        throw numerical_error(tag + e.what());
    }
}
}  // namespace detail

inline MomentTable emit_moment_table(const ModelParams& p, std::span<const double> data = {}) {
    MomentTable t;
    const MomentSet m = model_moments(p);
    std::optional<MomentSet> s;
    if (data.size() >= 4) s = sample_moments(data);
    auto row = [&](const char* name, const Moment& mv, const Moment* sv) {
        t.rows.push_back({name, mv, sv ? sv->value : nan});
    };
    row("mean", m.mean, s ? &s->mean : nullptr);
    row("variance", m.variance, s ? &s->variance : nullptr);
    row("skewness", m.skewness, s ? &s->skewness : nullptr);
    row("excess_kurtosis", m.excess_kurtosis, s ? &s->excess_kurtosis : nullptr);
    if (p.model == Model::ig)
        t.notes.push_back("excess kurtosis is 15 mu / lambda; tabulations that list 15 mu / lambda - 3 subtract 3 twice");
    if (p.model == Model::ncig)
        t.notes.push_back("excess kurtosis is computed from the composed cumulants (numeric-only)");
    return t;
}

inline std::vector<TestResult> density_forecast_tests(const ModelParams& p, std::span<const double> data, const FFTConfig& fft) {
    const CdfHandle cdf = model_cdf(p, data, fft);
    const std::vector<double> u = pit(cdf.cdf, data);
    const std::vector<double> z = inverse_normal_transform(u);
    return {ks_uniform_test(u), kuiper_test(u), adjusted_jarque_bera(z)};
}

/// Writes x,pdf,cdf from FFT inversion; with data, a side-car <path>.kde.csv holds x,kde.
inline std::string emit_density(const ModelParams& p, const FFTConfig& cfg, const std::string& path,
                                std::span<const double> data = {}) {
    const DensityGrid g = chf_to_pdf_fft(model_chf(p), covering_fft_config(p, data, cfg));
    {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw data_error("cannot write " + path);
        out << "x,pdf,cdf\n";
        for (std::size_t k = 0; k < g.size(); ++k)
            out << format_double(g.x(k)) << ',' << format_double(g.values[k]) << ',' << format_double(g.cdf[k]) << '\n';
        if (!out) throw data_error("write failed for " + path);
    }
    if (data.size() >= 2) {
        const std::string side = path + ".kde.csv";
        std::ofstream out(side, std::ios::binary);
        if (!out) throw data_error("cannot write " + side);
        const double h = kde_bandwidth(data);
        out << "x,kde\n";
        const std::size_t stride = std::max<std::size_t>(1, g.size() / 2048);
        for (std::size_t k = 0; k < g.size(); k += stride)
            out << format_double(g.x(k)) << ',' << format_double(kde(data, h, g.x(k))) << '\n';
    }
    return path;
}

/// ingest, estimate, likelihood, density-forecast tests and moment comparison.
inline Report run_fit(const RunConfig& cfg) {
    cfg.validate();
    const ReturnSeries series = detail::stage("ingest", [&] { return ingest(cfg.input, cfg.transform); });
    const std::vector<double>& x = series.values;
    FitResult fit = detail::stage("fit", [&]() -> FitResult {
        if (cfg.model == Model::ig || cfg.model == Model::normal) {
            const ModelParams p = cfg.model == Model::ig
                                      ? [&] { const IGParams q = ig_mle(x); return ModelParams(Model::ig, {q.mu, q.lambda}); }()
                                      : normal_mle(x);
            FitResult r{.params = p, .objective = ecf_objective(p, x, cfg.ecf), .init = p};
            r.init_source = "closed-form maximum likelihood";
            r.status = FitStatus::converged;
            return r;
        }
        ECFConfig ecf = cfg.ecf;
        ecf.seed = cfg.seed;
        return ecf_fit(cfg.model, x, ecf, cfg.fixed);
    });
    if (fit.status == FitStatus::failed && fit.message.rfind("likelihood", 0) != 0)
        throw numerical_error("fit: " + fit.message);
    if (std::isnan(fit.loglik) && fit.status != FitStatus::failed)
        fit.loglik = detail::stage("loglik", [&] { return loglik_fft(fit.params, x, cfg.fft); });
    fit.diagnostics = detail::stage("diagnostics", [&] { return density_forecast_tests(fit.params, x, cfg.fft); });

    Report r;
    r.command = "fit";
    r.model = to_string(cfg.model);
    r.status = to_string(fit.status);
    r.message = fit.message;
    r.params = fit.params.named();
    r.init = fit.init.named();
    r.init_source = fit.init_source;
    r.best_start = fit.best_start;
    r.evaluations = fit.evaluations;
    r.objective = fit.objective;
    r.loglik = fit.loglik;
    r.n = x.size();
    r.transform = to_string(cfg.transform);
    r.diagnostics = fit.diagnostics;
    r.moments = detail::stage("moments", [&] { return emit_moment_table(fit.params, x); });
    if (!cfg.density_path.empty())
        r.density_table = detail::stage("density", [&] { return emit_density(fit.params, cfg.fft, cfg.density_path, x); });
    r.input_hash = file_hash(cfg.input);
    r.config_hash = hex64(fnv1a(cfg.canonical().dump()));
    r.seed = cfg.seed;
    r.timestamp = utc_timestamp();
    return r;
}

}  // namespace msub
