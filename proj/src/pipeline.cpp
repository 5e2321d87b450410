#include "rumidas/pipeline.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>

#include "rumidas/error.hpp"
#include "rumidas/format.hpp"
#include "rumidas/io.hpp"

namespace rumidas {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kMcsStream = 0x6d6373;

// Files are written as "<name>.partial" and renamed once every output exists.
class OutputSet {
public:
    explicit OutputSet(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

    fs::path partial(const fs::path& rel) {
        const fs::path final_path = dir_ / rel;
        fs::create_directories(final_path.parent_path());
        fs::path tmp = final_path;
        tmp += ".partial";
        pending_.emplace_back(tmp, final_path);
        return tmp;
    }

    template <typename Fn>
    void write(const fs::path& rel, Fn&& fn) {
        const auto path = partial(rel);
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write '" + path.string() + "'");
        fn(out);
        out.flush();
        if (!out) throw IoError("failed writing '" + path.string() + "'");
    }

    void commit() {
        for (const auto& [tmp, final_path] : pending_) fs::rename(tmp, final_path);
        pending_.clear();
    }

private:
    fs::path dir_;
    std::vector<std::pair<fs::path, fs::path>> pending_;
};

void report(std::ostream& err, const Diagnostics& diag) {
    for (const auto& e : diag.errors) err << "error: " << e << '\n';
}

std::string sanitize(std::string s) {
    for (auto& c : s) {
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    }
    return s;
}

// Parse + data checks shared by validate and forecast. Returns nullopt after
// reporting problems.
std::optional<std::pair<RunConfig, SeriesBundle>> load_validated(const fs::path& path, const Overrides& ov,
                                                                 std::ostream& err) {
    std::ifstream in(path);
    if (!in) {
        err << "error: " << path.string() << ": cannot open config\n";
        return std::nullopt;
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        err << "error: " << path.string() << ": " << e.what() << '\n';
        return std::nullopt;
    }
    Diagnostics diag;
    RunConfig cfg = parse_run_config(doc, fs::absolute(path).parent_path(), path.string(), diag);
    if (ov.seed) {
        cfg.plan.seed = *ov.seed;
        cfg.scoring.bootstrap.seed = derive_seed(*ov.seed, kMcsStream);
    }
    if (ov.jobs) {
        if (*ov.jobs < 1) diag.add("--jobs: must be >= 1");
        cfg.plan.jobs = *ov.jobs;
    }
    if (!diag.ok()) {
        report(err, diag);
        return std::nullopt;
    }
    SeriesBundle data;
    try {
        data = load_bundle(cfg);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return std::nullopt;
    }
    check_coverage(cfg, data, diag);
    if (!diag.ok()) {
        report(err, diag);
        return std::nullopt;
    }
    return std::make_pair(std::move(cfg), std::move(data));
}

std::string hex64(std::uint64_t v) { return strfmt("%016llx", static_cast<unsigned long long>(v)); }

json manifest_json(const RunConfig& cfg) {
    const json canonical = cfg.canonical();
    json m;
    m["tool"] = "rumidas";
    m["version"] = kToolVersion;
    m["seed"] = cfg.plan.seed;
    m["config_hash"] = "fnv1a64:" + hex64(fnv1a64(canonical.dump()));
    m["libraries"] = {{"eigen", strfmt("%d.%d.%d", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)},
                      {"boost", BOOST_LIB_VERSION},
                      {"nlohmann_json", strfmt("%d.%d.%d", NLOHMANN_JSON_VERSION_MAJOR,
                                               NLOHMANN_JSON_VERSION_MINOR, NLOHMANN_JSON_VERSION_PATCH)}};
    m["config"] = canonical;
    return m;
}

void write_tables(OutputSet& outputs, const ScoreTable& table) {
    outputs.write("scores.csv", [&](std::ostream& o) { write_score_csv(table, o); });
    outputs.write("scores.md", [&](std::ostream& o) { write_score_markdown(table, o); });
    outputs.write("scores.jsonl", [&](std::ostream& o) { write_score_jsonl(table, o); });
    outputs.write("mcs.csv", [&](std::ostream& o) { write_mcs_report(table, o); });
}

}  // namespace

fs::path resolve_output_dir(const std::optional<fs::path>& flag, const fs::path& configured) {
    if (flag) return *flag;
    if (!configured.empty()) return configured;
    if (const char* env = std::getenv("RUMIDAS_OUTPUT_DIR"); env && *env) return env;
    return "rumidas_out";
}

int cmd_validate(const fs::path& config, std::ostream& out, std::ostream& err) {
    auto loaded = load_validated(config, {}, err);
    if (!loaded) return kExitInvalid;
    out << "OK\n";
    return kExitOk;
}

int cmd_forecast(const fs::path& config, const Overrides& overrides, std::ostream& out, std::ostream& err) {
    auto loaded = load_validated(config, overrides, err);
    if (!loaded) return kExitInvalid;
    auto& [cfg, data] = *loaded;
    const fs::path dir = resolve_output_dir(overrides.output, cfg.output_dir);

    std::string phase = "forecast";
    try {
        ForecastRun run = run_plan(cfg.plan, data);

        phase = "scoring";
        const ScoreTable table = build_score_table(run.records, cfg.benchmark, cfg.scoring);

        phase = "writing outputs";
        OutputSet outputs(dir);
        std::map<std::pair<std::string, int>, std::string> comp_files;
        std::map<std::pair<std::string, int>, std::vector<const ForecastRecord*>> groups;
        for (const auto& r : run.records) {
            if (r.ok()) groups[{r.model, r.horizon}].push_back(&r);
        }
        for (const auto& [key, recs] : groups) {
            const std::string rel = strfmt("components/%s_h%d.bin", key.first.c_str(), key.second);
            comp_files[key] = rel;
            write_components(outputs.partial(rel), recs);
        }
        outputs.write("forecasts.csv", [&](std::ostream& o) { write_forecast_csv(run.records, o, comp_files); });
        std::size_t n_errors = 0;
        outputs.write("errors.csv", [&](std::ostream& o) {
            o << "model,origin,horizon,error\n";
            for (const auto& r : run.records) {
                if (r.ok()) continue;
                ++n_errors;
                o << r.model << ',' << format_iso_date(r.origin) << ',' << r.horizon << ',' << sanitize(r.error)
                  << '\n';
            }
        });
        write_tables(outputs, table);
        if (cfg.plan.audit) {
            outputs.write("audit.json", [&](std::ostream& o) {
                json a = {{"fits", run.audit.fits},
                          {"window_rows", run.audit.window_rows},
                          {"forecast_rows", run.audit.forecast_rows},
                          {"violations", run.audit.violations},
                          {"messages", run.audit.messages}};
                o << a.dump(2) << '\n';
            });
        }
        outputs.write("manifest.json", [&](std::ostream& o) { o << manifest_json(cfg).dump(2) << '\n'; });
        outputs.commit();

        out << "wrote " << run.records.size() << " forecast records to " << dir.string() << '\n';
        if (n_errors) out << n_errors << " records failed; see errors.csv\n";
        if (cfg.plan.audit) {
            out << "audit: " << run.audit.fits << " fits, " << run.audit.window_rows << " window rows, "
                << run.audit.forecast_rows << " forecast rows, " << run.audit.violations << " violations\n";
            if (run.audit.violations > 0) {
                for (const auto& m : run.audit.messages) err << "look-ahead: " << m << '\n';
                return kExitRuntime;
            }
        }
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error during " << phase << ": " << e.what() << '\n';
        return kExitRuntime;
    }
}

int cmd_simulate(const fs::path& dgp_config, const Overrides& overrides, std::ostream& out, std::ostream& err) {
    std::ifstream in(dgp_config);
    if (!in) {
        err << "error: " << dgp_config.string() << ": cannot open config\n";
        return kExitInvalid;
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        err << "error: " << dgp_config.string() << ": " << e.what() << '\n';
        return kExitInvalid;
    }
    Diagnostics diag;
    DgpSpec spec = parse_dgp_config(doc, diag);
    if (overrides.seed) spec.seed = *overrides.seed;
    if (!diag.ok()) {
        report(err, diag);
        return kExitInvalid;
    }
    try {
        spec.validate();
    } catch (const SpecError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    }
    fs::path configured;
    if (doc.contains("output") && doc.at("output").is_string()) {
        configured = fs::absolute(dgp_config).parent_path() / doc.at("output").get<std::string>();
    }
    const fs::path dir = resolve_output_dir(overrides.output, configured);
    try {
        const SimulatedData sim = simulate_dgp(spec);
        OutputSet outputs(dir);
        outputs.write("target.csv", [&](std::ostream& o) { write_daily_csv(sim.target, o); });
        outputs.write("macro.csv", [&](std::ostream& o) { write_monthly_csv(sim.monthly, o); });
        if (spec.exog) outputs.write("oil.csv", [&](std::ostream& o) { write_daily_csv(sim.exog_weekdays, o); });
        outputs.commit();
        out << "wrote " << sim.target.size() << " days to " << dir.string() << '\n';
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error during simulation: " << e.what() << '\n';
        return kExitRuntime;
    }
}

int cmd_score(const ScoreRequest& request, const Overrides& overrides, std::ostream& out, std::ostream& err) {
    ScoreOptions options;
    std::string benchmark = request.benchmark;
    std::uint64_t seed = 0;
    if (request.config) {
        std::ifstream in(*request.config);
        json doc;
        try {
            if (!in) throw ConfigError("cannot open config");
            doc = json::parse(in);
        } catch (const std::exception& e) {
            err << "error: " << request.config->string() << ": " << e.what() << '\n';
            return kExitInvalid;
        }
        // Only the scoring fields matter here, so data-file problems are ignored.
        Diagnostics diag;
        const RunConfig cfg = parse_run_config(doc, fs::absolute(*request.config).parent_path(),
                                               request.config->string(), diag);
        options = cfg.scoring;
        seed = cfg.plan.seed;
        if (benchmark.empty()) benchmark = cfg.benchmark;
    }
    if (overrides.seed) seed = *overrides.seed;
    options.bootstrap.seed = derive_seed(seed, kMcsStream);
    if (request.alpha) options.alpha = *request.alpha;
    if (request.n_boot) options.bootstrap.n_boot = *request.n_boot;
    if (benchmark.empty()) {
        err << "error: no benchmark given (use --benchmark or --config)\n";
        return kExitInvalid;
    }
    if (!(options.alpha > 0.0 && options.alpha < 1.0)) {
        err << "error: --alpha must be in (0, 1)\n";
        return kExitInvalid;
    }
    if (options.bootstrap.n_boot < 100) {
        err << "error: --n-boot must be >= 100\n";
        return kExitInvalid;
    }

    std::string phase = "reading forecasts";
    try {
        std::ifstream in(request.forecasts);
        if (!in) throw IoError("cannot open '" + request.forecasts.string() + "'");
        auto rows = read_forecast_csv(in);
        const fs::path base = fs::absolute(request.forecasts).parent_path();
        std::map<std::string, std::map<Date, PredictiveDensity>> cache;
        std::vector<ForecastRecord> records;
        records.reserve(rows.size());
        for (auto& row : rows) {
            if (!row.components_file.empty()) {
                auto it = cache.find(row.components_file);
                if (it == cache.end()) {
                    it = cache.emplace(row.components_file, read_components(base / row.components_file)).first;
                }
                const auto found = it->second.find(row.record.origin);
                if (found == it->second.end()) {
                    throw IoError(strfmt("%s has no density for origin %s", row.components_file.c_str(),
                                         format_iso_date(row.record.origin).c_str()));
                }
                row.record.predictive = found->second;
            }
            records.push_back(std::move(row.record));
        }

        phase = "scoring";
        const ScoreTable table = build_score_table(records, benchmark, options);

        phase = "writing outputs";
        const fs::path dir = overrides.output ? *overrides.output : base;
        OutputSet outputs(dir);
        write_tables(outputs, table);
        outputs.commit();
        out << "scored " << records.size() << " records into " << dir.string() << '\n';
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error during " << phase << ": " << e.what() << '\n';
        return kExitRuntime;
    }
}

}  // namespace rumidas
