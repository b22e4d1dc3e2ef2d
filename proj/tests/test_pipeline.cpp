#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "catch_amalgamated.hpp"
#include "msub/msub.hpp"

using namespace msub;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "msub_test_pipeline";
    fs::create_directories(dir);
    return dir / name;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

std::string error_of(const std::string& text, Transform t) {
    std::istringstream in(text);
    try {
        ingest(in, t, "prices.csv");
    } catch (const data_error& e) {
        return e.what();
    }
    return "";
}

struct Table {
    std::vector<double> x, pdf, cdf;
};

Table read_density(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    REQUIRE(line == "x,pdf,cdf");
    Table t;
    while (std::getline(in, line)) {
        std::istringstream row(line);
        std::string a, b, c;
        std::getline(row, a, ',');
        std::getline(row, b, ',');
        std::getline(row, c, ',');
        t.x.push_back(std::stod(a));
        t.pdf.push_back(std::stod(b));
        t.cdf.push_back(std::stod(c));
    }
    return t;
}

ModelParams reference_ncig() { return {Model::ncig, {0.122, 12.54, 0.0035, 17.66, 0.0, 0.0, -0.281, 0.252}}; }

RunConfig ig_config(const fs::path& input) {
    RunConfig c;
    c.model = Model::ig;
    c.input = input.string();
    c.transform = Transform::raw;
    c.seed = 7;
    return c;
}

}  // namespace

TEST_CASE("ingest transforms") {
    std::istringstream prices("date,value\n2020-01-02,100\n2020-01-03,110\n");
    const ReturnSeries r = ingest(prices, Transform::log_return);
    REQUIRE(r.values.size() == 1);
    CHECK(r.values[0] == Approx(0.09531017980432493).epsilon(1e-15));
    CHECK(r.dates[0] == "2020-01-03");

    std::istringstream levels("date,value\r\n2020-01-02,20\r\n2020-01-03,30\r\n");
    const ReturnSeries s = ingest(levels, Transform::square);
    CHECK(s.values == std::vector<double>{400.0, 900.0});

    std::istringstream raw("\xEF\xBB\xBF" "date,value\n2020-01-02,-1.5\n\n2020-01-06,2.5\n");
    CHECK(ingest(raw, Transform::raw).values == std::vector<double>{-1.5, 2.5});
}

TEST_CASE("ingest errors name the offending line") {
    CHECK(error_of("date,value\n2020-01-02,100\n2020-01-02,101\n", Transform::raw).find("prices.csv:3:") != std::string::npos);
    CHECK(error_of("date,value\n2020-01-03,100\n2020-01-02,101\n", Transform::raw).find("prices.csv:3:") != std::string::npos);
    CHECK(error_of("date,value\n2020-01-02,100\n2020-01-03,\n", Transform::raw).find("prices.csv:3:") != std::string::npos);
    CHECK(error_of("date,value\n2020-01-02,100\n2020-02-30,1\n", Transform::raw).find("prices.csv:3:") != std::string::npos);
    CHECK(error_of("date,value\n2020-01-02,100\n2020-01-03,0\n", Transform::log_return).find("prices.csv:3:") != std::string::npos);
    CHECK(error_of("day,close\n2020-01-02,100\n", Transform::raw).find("prices.csv:1:") != std::string::npos);
    CHECK(error_of("date,value\n2020-01-02,1,2\n", Transform::raw).find("prices.csv:2:") != std::string::npos);
    CHECK(error_of("date,value\n2020-01-02,100\n", Transform::log_return).find("no observations") != std::string::npos);
    CHECK_THROWS_AS(ingest("/nonexistent/prices.csv", Transform::raw), data_error);
    CHECK_THROWS_AS(transform_from_string("log"), config_error);
}

TEST_CASE("series round trip is bit exact") {
    const auto x = model_sample(reference_ncig(), 5000, 3);
    const auto dates = synthetic_dates(x.size());
    const fs::path p = scratch("roundtrip.csv");
    write_series(p.string(), dates, x);
    const ReturnSeries back = ingest(p.string(), Transform::raw);
    CHECK(back.dates == dates);
    REQUIRE(back.values.size() == x.size());
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(back.values[i] == x[i]);
    CHECK(file_hash(p.string()).size() == 16);
    CHECK(hex64(fnv1a("")) == "cbf29ce484222325");
    CHECK(hex64(fnv1a("a")) == "af63dc4c8601ec8c");
}

TEST_CASE("moment table") {
    const MomentTable t = emit_moment_table(ModelParams(Model::ig, {8096.84, 90189.7}));
    REQUIRE(t.rows.size() == 4);
    CHECK(t.rows[0].model.value == Approx(8096.84).epsilon(1e-12));
    CHECK(t.rows[1].model.value == Approx(5.8856e6).epsilon(1e-3));
    CHECK(t.rows[2].model.value == Approx(0.8989).margin(1e-3));
    CHECK(t.rows[3].model.value == Approx(1.3466).margin(1e-3));
    CHECK(t.rows[3].model.value == Approx(15.0 * 8096.84 / 90189.7).epsilon(1e-12));
    CHECK(std::isnan(t.rows[0].sample));
    CHECK(!t.notes.empty());
    const MomentTable u = emit_moment_table(ModelParams(Model::ig, {172.7, 323.6}));
    CHECK(u.rows[2].model.value == Approx(2.1916).margin(1e-3));

    const auto x = sample_ig(IGParams(2.0, 5.0), 1000, 4);
    const MomentTable s = emit_moment_table(ModelParams(Model::ig, {2.0, 5.0}), x);
    CHECK(s.rows[0].sample == Approx(sample_moments(x).mean.value).epsilon(1e-15));
    CHECK(emit_moment_table(reference_ncig()).rows[3].model.status == MomentStatus::numeric_only);
}

TEST_CASE("density table") {
    const fs::path p = scratch("density.csv");
    const auto x = model_sample(reference_ncig(), 2000, 5);
    emit_density(reference_ncig(), FFTConfig{}, p.string(), x);
    const Table t = read_density(p);
    REQUIRE(t.x.size() > 1000);
    const double dx = t.x[1] - t.x[0];
    double mass = 0.0;
    std::size_t mode = 0;
    for (std::size_t k = 0; k < t.x.size(); ++k) {
        mass += t.pdf[k] * dx;
        if (t.pdf[k] > t.pdf[mode]) mode = k;
        if (k > 0) CHECK(t.cdf[k] >= t.cdf[k - 1]);
    }
    CHECK(mass == Approx(1.0).margin(1e-4));
    CHECK(std::abs(t.x[mode]) < 0.01);
    int turns = 0;
    for (std::size_t k = 1; k + 1 < t.x.size(); ++k)
        if (t.pdf[k] > 1e-6 && t.pdf[k] > t.pdf[k - 1] && t.pdf[k] > t.pdf[k + 1]) ++turns;
    CHECK(turns == 1);
    CHECK(fs::exists(p.string() + ".kde.csv"));
}

TEST_CASE("IG fit end to end") {
    const IGParams truth(2.0, 5.0);
    const auto x = sample_ig(truth, 100000, 6);
    const fs::path input = scratch("ig.csv");
    write_series(input.string(), synthetic_dates(x.size()), x);
    RunConfig cfg = ig_config(input);
    cfg.density_path = scratch("ig_density.csv").string();
    const Report r = run_fit(cfg);
    CHECK(r.params.at("mu") == Approx(2.0).epsilon(0.02));
    CHECK(r.params.at("lambda") == Approx(5.0).epsilon(0.02));
    REQUIRE(r.diagnostics.size() == 3);
    CHECK(r.diagnostics[0].method == "ks");
    CHECK(r.diagnostics[0].p_value > 0.05);
    CHECK(std::isfinite(r.loglik));
    CHECK(r.input_hash == file_hash(input.string()));
    CHECK(r.config_hash.size() == 16);
    CHECK(r.n == x.size());

    const Report again = run_fit(cfg);
    CHECK(report_payload(again).dump() == report_payload(r).dump());

    const json j = to_json(r);
    const Report back = report_from_json(json::parse(j.dump()));
    CHECK(to_json(back).dump() == j.dump());

    RunConfig other = cfg;
    other.seed = 8;
    CHECK(run_fit(other).config_hash != r.config_hash);
}

TEST_CASE("NCIG fit is deterministic") {
    const auto x = model_sample(reference_ncig(), 3000, 9);
    const fs::path input = scratch("ncig.csv");
    write_series(input.string(), synthetic_dates(x.size()), x);
    RunConfig cfg;
    cfg.model = Model::ncig;
    cfg.input = input.string();
    cfg.seed = 11;
    cfg.ecf.restarts = 2;
    cfg.ecf.max_evals = 1500;
    const Report a = run_fit(cfg);
    const Report b = run_fit(cfg);
    CHECK(report_payload(a).dump() == report_payload(b).dump());
    CHECK(a.params.size() == 8);
}

TEST_CASE("run configuration") {
    const fs::path p = scratch("config.json");
    write_text(p, R"({"model": "cig", "input": "x.csv", "transform": "square", "seed": 3,
                     "fixed": {"mu_t": 2.0}, "ecf": {"points": 32, "weight": "uniform"}, "fft": {"grid_size": 4096}})");
    const RunConfig c = load_run_config(p.string());
    CHECK(c.model == Model::cig);
    CHECK(c.transform == Transform::square);
    CHECK(c.seed == 3);
    CHECK(c.fixed.at("mu_t") == 2.0);
    CHECK(c.ecf.points == 32);
    CHECK(c.ecf.weight == EcfWeight::uniform);
    CHECK(c.fft.grid_size == 4096);
    write_text(p, R"({"model": "nig"})");
    CHECK_THROWS_AS(load_run_config(p.string()), config_error);
    write_text(p, R"({"ecf": {"weight": "cauchy"}})");
    CHECK_THROWS_AS(load_run_config(p.string()), config_error);
    write_text(p, "{");
    CHECK_THROWS_AS(load_run_config(p.string()), config_error);
    CHECK_THROWS_AS(load_run_config("/nonexistent.json"), config_error);
    RunConfig missing;
    missing.input = "/nonexistent/data.csv";
    CHECK_THROWS(run_fit(missing));
}
