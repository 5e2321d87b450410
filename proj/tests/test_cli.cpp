#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include <json.hpp>

#include "fixtures.hpp"
#include "rumidas/error.hpp"
#include "rumidas/io.hpp"
#include "rumidas/pipeline.hpp"

using namespace rumidas;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

void write_json(const fs::path& p, const json& j) { write_file(p, j.dump(2)); }

json dgp_config(std::uint64_t seed) {
    return {{"start", "2010-01-01"}, {"days", 1300}, {"seed", seed}, {"daily", {{"seasonal", {0.0, 1.0, 0.5, 2.0}}}}};
}

json run_config(int days = 20) {
    return {{"data", {{"target", "data/target.csv"}, {"monthly", {{"macro", "data/macro.csv"}}}, {"daily", {{"oil", "data/oil.csv"}}}}},
            {"plan",
             {{"window_days", 400}, {"horizons", {1, 2, 7}}, {"evaluation", {{"start", "2012-06-01"}, {"days", days}}},
              {"density_components", 40}}},
            {"models",
             {{{"name", "BAR3"}, {"benchmark", "ar3"}},
              {{"name", "RUMIDAS"}, {"lf", {"macro"}}, {"daily_exog", {{{"name", "oil"}, {"lags", {1}}}}}}}},
            {"benchmark", "BAR3"},
            {"mcmc", {{"draws", 300}, {"burn_in", 100}}},
            {"scoring", {{"n_boot", 200}}},
            {"seed", 3}};
}

// A scratch directory holding a simulated bundle under data/.
struct Workspace {
    fixture::TempDir dir{"cli"};

    Workspace() {
        write_json(dir / "dgp.json", dgp_config(17));
        std::ostringstream out;
        std::ostringstream err;
        REQUIRE(cmd_simulate(dir / "dgp.json", {.output = dir / "data"}, out, err) == kExitOk);
    }

    fs::path config(const json& j, const std::string& name = "run.json") const {
        const auto p = dir / name;
        write_json(p, j);
        return p;
    }
};

struct Captured {
    int code;
    std::string out;
    std::string err;
};

Captured validate(const fs::path& p) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = cmd_validate(p, out, err);
    return {code, out.str(), err.str()};
}

Captured forecast(const fs::path& p, const Overrides& ov) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = cmd_forecast(p, ov, out, err);
    return {code, out.str(), err.str()};
}

std::size_t data_rows(const fs::path& csv) {
    std::ifstream in(csv);
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) ++n;
    return n - 1;
}

std::map<std::string, std::string> tree(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = fixture::slurp(e.path());
    }
    return out;
}

}  // namespace

TEST_CASE("daily CSV round-trip keeps absent dates missing") {
    std::istringstream in("date,value\n2020-01-01,1.5\n2020-01-02,\n2020-01-04,-3\n");
    const auto s = read_daily_csv(in);
    CHECK(s.size() == 4);
    CHECK(is_missing(s[1]));
    CHECK(is_missing(s[2]));
    CHECK(s[3] == -3.0);
    std::ostringstream out;
    write_daily_csv(s, out);
    CHECK(out.str() == "date,value\n2020-01-01,1.5\n2020-01-04,-3\n");
    std::istringstream bad("day,value\n2020-01-01,1\n");
    CHECK_THROWS_AS(read_daily_csv(bad), IoError);
    std::istringstream unordered("date,value\n2020-01-02,1\n2020-01-01,2\n");
    CHECK_THROWS_AS(read_daily_csv(unordered), IoError);
    std::istringstream junk("date,value\n2020-01-02,abc\n");
    CHECK_THROWS_AS(read_daily_csv(junk), IoError);
}

TEST_CASE("monthly CSV synthesizes first-working-day releases when the column is absent") {
    std::istringstream in("year,month,value\n2019,5,1.0\n2019,6,2.0\n");
    const auto m = read_monthly_csv(in);
    // 2019-06-01 is a Saturday.
    CHECK(m.release_dates()[0] == make_date(2019, 6, 3));
    CHECK(m.release_dates()[1] == make_date(2019, 7, 1));
    std::ostringstream out;
    write_monthly_csv(m, out);
    CHECK(out.str() == "year,month,value,release_date\n2019,5,1,2019-06-03\n2019,6,2,2019-07-01\n");
    std::istringstream explicit_rel("year,month,value,release_date\n2019,5,1.0,2019-06-20\n");
    CHECK(read_monthly_csv(explicit_rel).release_dates()[0] == make_date(2019, 6, 20));
    std::istringstream early("year,month,value,release_date\n2019,5,1.0,2019-05-20\n");
    CHECK_THROWS_AS(read_monthly_csv(early), IoError);
}

TEST_CASE("forecast CSV and component files round-trip") {
    fixture::TempDir dir("io");
    ForecastRecord r;
    r.model = "M";
    r.origin = make_date(2020, 3, 1);
    r.target = make_date(2020, 3, 3);
    r.horizon = 2;
    r.mean = 0.1 + 0.2;
    r.realized = -1.25;
    r.predictive = PredictiveDensity({0.3, 0.30000000000000004}, {1.0 / 3.0, 2.0});
    ForecastRecord failed = r;
    failed.origin = make_date(2020, 3, 2);
    failed.target = make_date(2020, 3, 4);
    failed.error = "boom";
    const std::vector<ForecastRecord> recs{r, failed};
    std::ostringstream out;
    write_forecast_csv(recs, out, {{{"M", 2}, "components/M_h2.bin"}});
    std::istringstream in(out.str());
    const auto rows = read_forecast_csv(in);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].record.mean == r.mean);
    CHECK(rows[0].record.realized == r.realized);
    CHECK(rows[0].components_file == "components/M_h2.bin");
    CHECK_FALSE(rows[1].record.ok());
    CHECK(rows[1].components_file.empty());

    const ForecastRecord* ptr = &r;
    write_components(dir / "c.bin", std::span<const ForecastRecord* const>(&ptr, 1));
    const auto back = read_components(dir / "c.bin");
    REQUIRE(back.count(r.origin) == 1);
    CHECK(back.at(r.origin).means() == r.predictive.means());
    CHECK(back.at(r.origin).variances() == r.predictive.variances());
    write_file(dir / "junk.bin", "nonsense");
    CHECK_THROWS_AS(read_components(dir / "junk.bin"), IoError);
}

TEST_CASE("validate accepts a well-formed config") {
    Workspace ws;
    const auto res = validate(ws.config(run_config()));
    CHECK(res.code == 0);
    CHECK(res.out == "OK\n");
    CHECK(res.err.empty());
}

TEST_CASE("validate names the horizon problem and exits 1") {
    Workspace ws;
    auto cfg = run_config();
    cfg["plan"]["horizons"] = {1, 0};
    const auto res = validate(ws.config(cfg));
    CHECK(res.code == 1);
    CHECK(res.err.find("plan.horizons[1]") != std::string::npos);
    CHECK(res.err.find("horizons must be ≥ 1") != std::string::npos);
}

TEST_CASE("validate reports monthly coverage that ends before evaluation starts") {
    Workspace ws;
    write_file(ws.dir / "short.csv", "year,month,value\n2010,1,1\n2010,2,2\n");
    auto cfg = run_config();
    cfg["data"]["monthly"]["macro"] = "short.csv";
    const auto res = validate(ws.config(cfg));
    CHECK(res.code == 1);
    CHECK(res.err.find("short.csv") != std::string::npos);
    CHECK(res.err.find("2010-03-01") != std::string::npos);
    CHECK(res.err.find("2012-06-01") != std::string::npos);
}

TEST_CASE("validate collects schema problems with their locus") {
    Workspace ws;
    auto cfg = run_config();
    cfg["models"][1]["name"] = "BAR3";
    cfg["data"]["daily"]["oil"] = "missing.csv";
    cfg["mcmc"]["draws"] = "many";
    cfg["models"][1]["lf"] = {"gdp"};
    const auto res = validate(ws.config(cfg));
    CHECK(res.code == 1);
    CHECK(res.err.find("models[1].name: duplicate model name 'BAR3'") != std::string::npos);
    CHECK(res.err.find("data.daily.oil: file") != std::string::npos);
    CHECK(res.err.find("mcmc.draws: expected an integer") != std::string::npos);
    CHECK(res.err.find("unknown monthly series 'gdp'") != std::string::npos);
    write_file(ws.dir / "broken.json", "{ not json");
    CHECK(validate(ws.dir / "broken.json").code == 1);
    CHECK(validate(ws.dir / "absent.json").code == 1);
}

TEST_CASE("validate reports a window that reaches before the data") {
    Workspace ws;
    auto cfg = run_config();
    cfg["plan"]["window_days"] = 1000;
    const auto res = validate(ws.config(cfg));
    CHECK(res.code == 1);
    CHECK(res.err.find("estimation window") != std::string::npos);
}

TEST_CASE("forecast: 2 models x 3 horizons x 100 days gives 600 rows and a full output set") {
    Workspace ws;
    const auto out = ws.dir / "out";
    const auto res = forecast(ws.config(run_config(100)), {.output = out});
    REQUIRE_MESSAGE(res.code == 0, res.err);
    CHECK(data_rows(out / "forecasts.csv") == 600);
    for (const char* f : {"errors.csv", "scores.csv", "scores.md", "scores.jsonl", "mcs.csv", "manifest.json",
                          "components/BAR3_h1.bin", "components/RUMIDAS_h7.bin"}) {
        CHECK_MESSAGE(fs::exists(out / f), f);
    }
    CHECK(data_rows(out / "errors.csv") == 0);
    for (const auto& e : fs::recursive_directory_iterator(out)) {
        CHECK(e.path().extension() != ".partial");
    }
    const auto manifest = json::parse(fixture::slurp(out / "manifest.json"));
    CHECK(manifest["seed"] == 3);
    CHECK(manifest["version"] == kToolVersion);
    CHECK(manifest["config_hash"].get<std::string>().rfind("fnv1a64:", 0) == 0);
    CHECK(manifest["config"]["plan"]["horizons"] == json({1, 2, 7}));
    CHECK(fixture::slurp(out / "scores.md").find("### RMSE") != std::string::npos);
}

TEST_CASE("rerunning from the manifest reproduces every byte, whatever the worker count") {
    Workspace ws;
    const auto first = ws.dir / "first";
    REQUIRE(forecast(ws.config(run_config()), {.output = first}).code == 0);
    const auto second = ws.dir / "second";
    REQUIRE(forecast(first / "manifest.json", {.output = second, .jobs = 3}).code == 0);
    CHECK(tree(first) == tree(second));
    const auto reseeded = ws.dir / "reseeded";
    REQUIRE(forecast(first / "manifest.json", {.output = reseeded, .seed = 4}).code == 0);
    CHECK(fixture::slurp(reseeded / "forecasts.csv") != fixture::slurp(first / "forecasts.csv"));
    CHECK(json::parse(fixture::slurp(reseeded / "manifest.json"))["seed"] == 4);
}

TEST_CASE("score re-derives the tables of a forecast run from its dump") {
    Workspace ws;
    const auto run = ws.dir / "run";
    REQUIRE(forecast(ws.config(run_config()), {.output = run}).code == 0);
    std::ostringstream out;
    std::ostringstream err;
    ScoreRequest req;
    req.forecasts = run / "forecasts.csv";
    req.config = run / "manifest.json";
    const auto rescored = ws.dir / "rescored";
    REQUIRE(cmd_score(req, {.output = rescored}, out, err) == 0);
    for (const char* f : {"scores.csv", "scores.md", "scores.jsonl", "mcs.csv"}) {
        CHECK_MESSAGE(fixture::slurp(run / f) == fixture::slurp(rescored / f), f);
    }
    ScoreRequest nobench;
    nobench.forecasts = run / "forecasts.csv";
    CHECK(cmd_score(nobench, {}, out, err) == 1);
}

TEST_CASE("simulate is seed-deterministic and rejects explosive dynamics") {
    fixture::TempDir dir("sim");
    write_json(dir / "dgp.json", dgp_config(5));
    std::ostringstream out;
    std::ostringstream err;
    REQUIRE(cmd_simulate(dir / "dgp.json", {.output = dir / "a"}, out, err) == 0);
    REQUIRE(cmd_simulate(dir / "dgp.json", {.output = dir / "b"}, out, err) == 0);
    CHECK(tree(dir / "a") == tree(dir / "b"));
    CHECK(tree(dir / "a").size() == 3);
    REQUIRE(cmd_simulate(dir / "dgp.json", {.output = dir / "c", .seed = 6}, out, err) == 0);
    CHECK(tree(dir / "c") != tree(dir / "a"));

    auto bad = dgp_config(5);
    bad["daily"]["ar"] = {1.2};
    write_json(dir / "bad.json", bad);
    std::ostringstream err2;
    CHECK(cmd_simulate(dir / "bad.json", {.output = dir / "d"}, out, err2) == 1);
    CHECK(err2.str().find("explosive") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "d" / "target.csv"));
}

TEST_CASE("output directory precedence: flag, config, environment") {
    CHECK(resolve_output_dir(fs::path("flag"), "cfg") == "flag");
    CHECK(resolve_output_dir(std::nullopt, "cfg") == "cfg");
    ::setenv("RUMIDAS_OUTPUT_DIR", "from_env", 1);
    CHECK(resolve_output_dir(std::nullopt, "") == "from_env");
    ::unsetenv("RUMIDAS_OUTPUT_DIR");
    CHECK(resolve_output_dir(std::nullopt, "") == "rumidas_out");
}

#ifdef RUMIDAS_CLI_PATH
TEST_CASE("the command-line binary maps outcomes to exit codes") {
    Workspace ws;
    const auto good = ws.config(run_config(), "good.json");
    auto bad_cfg = run_config();
    bad_cfg["plan"]["horizons"] = {0};
    const auto bad = ws.config(bad_cfg, "bad.json");
    const std::string bin = RUMIDAS_CLI_PATH;
    auto run = [&](const std::string& args) {
        const int status = std::system((bin + " " + args + " > /dev/null 2>&1").c_str());
        return WEXITSTATUS(status);
    };
    CHECK(run("validate " + good.string()) == 0);
    CHECK(run("validate " + bad.string()) == 1);
    CHECK(run("forecast " + good.string() + " --jobs 2 -o " + (ws.dir / "o").string()) == 0);
    CHECK(fs::exists(ws.dir / "o" / "forecasts.csv"));
    CHECK(run("score " + (ws.dir / "o" / "forecasts.csv").string() + " -b BAR3 -o " + (ws.dir / "s").string()) == 0);
    CHECK(run("score " + (ws.dir / "o" / "forecasts.csv").string() + " -b NOPE") == 2);
    CHECK(run("frobnicate") != 0);
}
#endif
