#include "rumidas/config.hpp"

#include <fstream>
#include <set>

#include "rumidas/error.hpp"
#include "rumidas/format.hpp"
#include "rumidas/io.hpp"

namespace rumidas {

using nlohmann::json;

namespace {

class Reader {
public:
    Reader(const std::string& source, Diagnostics& diag) : source_(source), diag_(diag) {}

    void error(const std::string& locus, const std::string& msg) {
        diag_.add(source_ + ": " + locus + ": " + msg);
    }

    template <typename T>
    T get(const json& obj, const char* key, T fallback, const std::string& locus) {
        if (!obj.is_object() || !obj.contains(key)) return fallback;
        const auto& v = obj.at(key);
        try {
            if constexpr (std::is_same_v<T, bool>) {
                if (!v.is_boolean()) throw std::invalid_argument("expected a boolean");
            } else if constexpr (std::is_integral_v<T>) {
                if (!v.is_number_integer()) throw std::invalid_argument("expected an integer");
            } else if constexpr (std::is_floating_point_v<T>) {
                if (!v.is_number()) throw std::invalid_argument("expected a number");
            } else {
                if (!v.is_string()) throw std::invalid_argument("expected a string");
            }
            return v.get<T>();
        } catch (const std::exception& e) {
            error(locus + "." + key, e.what());
            return fallback;
        }
    }

    std::vector<int> int_list(const json& obj, const char* key, std::vector<int> fallback,
                              const std::string& locus) {
        if (!obj.is_object() || !obj.contains(key)) return fallback;
        const auto& v = obj.at(key);
        if (!v.is_array()) {
            error(locus + "." + key, "expected an array of integers");
            return fallback;
        }
        std::vector<int> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number_integer()) {
                error(strfmt("%s.%s[%zu]", locus.c_str(), key, i), "expected an integer");
                continue;
            }
            out.push_back(v[i].get<int>());
        }
        return out;
    }

    std::optional<Date> date(const json& obj, const char* key, const std::string& locus, bool required) {
        if (!obj.is_object() || !obj.contains(key)) {
            if (required) error(locus + "." + key, "is required");
            return std::nullopt;
        }
        const auto& v = obj.at(key);
        if (!v.is_string()) {
            error(locus + "." + key, "expected an ISO date string");
            return std::nullopt;
        }
        try {
            return parse_iso_date(v.get<std::string>());
        } catch (const Error& e) {
            error(locus + "." + key, e.what());
            return std::nullopt;
        }
    }

    const std::string& source() const { return source_; }
    Diagnostics& diag() { return diag_; }

private:
    std::string source_;
    Diagnostics& diag_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    if (path.is_relative()) path = base / path;
    return path.lexically_normal();
}

ModelSpec parse_model(const json& j, const std::string& locus, Reader& rd) {
    ModelSpec spec;
    if (!j.is_object()) {
        rd.error(locus, "expected an object");
        return spec;
    }
    spec.name = rd.get<std::string>(j, "name", "", locus);
    if (spec.name.empty()) rd.error(locus + ".name", "is required");
    if (j.contains("benchmark")) {
        const auto order = rd.get<std::string>(j, "benchmark", "", locus);
        if (order == "ar1") {
            spec = benchmark_spec(BenchmarkOrder::kAR1, spec.name);
        } else if (order == "ar3") {
            spec = benchmark_spec(BenchmarkOrder::kAR3, spec.name);
        } else {
            rd.error(locus + ".benchmark", "must be \"ar1\" or \"ar3\"");
        }
        return spec;
    }
    spec.hf_lags = rd.int_list(j, "hf_lags", spec.hf_lags, locus);
    spec.interact_hf_lags = rd.get<bool>(j, "interact_hf_lags", spec.interact_hf_lags, locus);
    spec.seasonal_dummies = rd.get<bool>(j, "seasonal", spec.seasonal_dummies, locus);
    spec.intercept = rd.get<bool>(j, "intercept", spec.intercept, locus);
    spec.k = rd.get<int>(j, "k", spec.k, locus);
    spec.period_anchor = rd.get<std::string>(j, "period_anchor", "", locus);
    const auto scheme = rd.get<std::string>(j, "scheme", "fixed_block", locus);
    try {
        spec.scheme = parse_period_scheme(scheme);
    } catch (const Error& e) {
        rd.error(locus + ".scheme", e.what());
    }
    if (j.contains("lf")) {
        const auto& lf = j.at("lf");
        if (!lf.is_array()) {
            rd.error(locus + ".lf", "expected an array");
        } else {
            for (std::size_t i = 0; i < lf.size(); ++i) {
                const std::string l = strfmt("%s.lf[%zu]", locus.c_str(), i);
                if (lf[i].is_string()) {
                    spec.lf_predictors.push_back({lf[i].get<std::string>(), 1});
                } else {
                    spec.lf_predictors.push_back(
                        {rd.get<std::string>(lf[i], "name", "", l), rd.get<int>(lf[i], "lags", 1, l)});
                }
            }
        }
    }
    if (j.contains("daily_exog")) {
        const auto& ex = j.at("daily_exog");
        if (!ex.is_array()) {
            rd.error(locus + ".daily_exog", "expected an array");
        } else {
            for (std::size_t i = 0; i < ex.size(); ++i) {
                const std::string l = strfmt("%s.daily_exog[%zu]", locus.c_str(), i);
                if (ex[i].is_string()) {
                    spec.daily_exog.push_back({ex[i].get<std::string>(), {1}});
                } else {
                    spec.daily_exog.push_back(
                        {rd.get<std::string>(ex[i], "name", "", l), rd.int_list(ex[i], "lags", {1}, l)});
                }
            }
        }
    }
    try {
        spec.validate();
    } catch (const Error& e) {
        rd.error(locus, e.what());
    }
    return spec;
}

}  // namespace

ModelSpec parse_model_spec(const json& j, const std::string& locus, Diagnostics& diag) {
    Reader rd("model", diag);
    return parse_model(j, locus, rd);
}

json model_spec_json(const ModelSpec& spec) {
    json j;
    j["name"] = spec.name;
    j["hf_lags"] = spec.hf_lags;
    j["interact_hf_lags"] = spec.interact_hf_lags;
    json lf = json::array();
    for (const auto& p : spec.lf_predictors) lf.push_back({{"name", p.name}, {"lags", p.lags}});
    j["lf"] = lf;
    json ex = json::array();
    for (const auto& e : spec.daily_exog) ex.push_back({{"name", e.name}, {"lags", e.lags}});
    j["daily_exog"] = ex;
    j["seasonal"] = spec.seasonal_dummies;
    j["intercept"] = spec.intercept;
    j["k"] = spec.k;
    j["scheme"] = std::string(period_scheme_name(spec.scheme));
    j["period_anchor"] = spec.period_anchor;
    return j;
}

json RunConfig::canonical() const {
    json j;
    json data;
    data["target"] = target_path.string();
    json monthly_j = json::object();
    for (const auto& m : monthly) monthly_j[m.name] = m.path.string();
    data["monthly"] = monthly_j;
    json daily_j = json::object();
    for (const auto& d : daily) daily_j[d.name] = {{"path", d.path.string()}, {"interpolate", d.interpolate}};
    data["daily"] = daily_j;
    json hol = json::array();
    for (const auto& h : holidays) hol.push_back(format_iso_date(h));
    data["holidays"] = hol;
    j["data"] = data;

    json plan_j;
    plan_j["window_days"] = plan.estimation_window_days;
    plan_j["horizons"] = plan.horizons;
    plan_j["evaluation"] = {{"start", format_iso_date(plan.evaluation.first)},
                            {"end", format_iso_date(plan.evaluation.last)}};
    plan_j["refit_every"] = plan.refit_every;
    plan_j["density_components"] = plan.density_components;
    plan_j["audit"] = plan.audit;
    j["plan"] = plan_j;

    json models_j = json::array();
    for (const auto& m : plan.models) models_j.push_back(model_spec_json(m));
    j["models"] = models_j;
    j["benchmark"] = benchmark;
    j["prior"] = {{"coef_variance", plan.prior.coef_variance},
                  {"shape", plan.prior.shape},
                  {"rate", plan.prior.rate}};
    j["mcmc"] = {{"draws", plan.mcmc.n_draws},
                 {"burn_in", plan.mcmc.burn_in},
                 {"thin", plan.mcmc.thin},
                 {"sampler", std::string(sampler_route_name(plan.mcmc.route))}};
    j["scoring"] = {{"alpha", scoring.alpha},
                    {"n_boot", scoring.bootstrap.n_boot},
                    {"block_length", scoring.bootstrap.block_length},
                    {"small_sample_dm", scoring.dm.small_sample_correction}};
    j["seed"] = plan.seed;
    return j;
}

RunConfig parse_run_config(const json& input, const std::filesystem::path& base_dir,
                           const std::string& source, Diagnostics& diag) {
    Reader rd(source, diag);
    RunConfig cfg;
    const json& doc = input.is_object() && input.contains("config") ? input.at("config") : input;
    if (!doc.is_object()) {
        rd.error("$", "config must be a JSON object");
        return cfg;
    }

    // data
    const json data = doc.value("data", json::object());
    if (!data.is_object()) rd.error("data", "expected an object");
    const auto target = rd.get<std::string>(data, "target", "", "data");
    if (target.empty()) {
        rd.error("data.target", "is required");
    } else {
        cfg.target_path = resolve(base_dir, target);
    }
    if (data.contains("monthly")) {
        const auto& m = data.at("monthly");
        if (!m.is_object()) {
            rd.error("data.monthly", "expected an object of name -> path");
        } else {
            for (const auto& [name, v] : m.items()) {
                if (!v.is_string()) {
                    rd.error("data.monthly." + name, "expected a path string");
                    continue;
                }
                cfg.monthly.push_back({name, resolve(base_dir, v.get<std::string>())});
            }
        }
    }
    if (data.contains("daily")) {
        const auto& d = data.at("daily");
        if (!d.is_object()) {
            rd.error("data.daily", "expected an object of name -> path");
        } else {
            for (const auto& [name, v] : d.items()) {
                DailySource src;
                src.name = name;
                if (v.is_string()) {
                    src.path = resolve(base_dir, v.get<std::string>());
                } else {
                    const auto p = rd.get<std::string>(v, "path", "", "data.daily." + name);
                    if (p.empty()) rd.error("data.daily." + name + ".path", "is required");
                    src.path = resolve(base_dir, p);
                    src.interpolate = rd.get<bool>(v, "interpolate", true, "data.daily." + name);
                }
                cfg.daily.push_back(std::move(src));
            }
        }
    }
    if (data.contains("holidays")) {
        const auto& h = data.at("holidays");
        if (!h.is_array()) {
            rd.error("data.holidays", "expected an array of ISO dates");
        } else {
            for (std::size_t i = 0; i < h.size(); ++i) {
                try {
                    cfg.holidays.push_back(parse_iso_date(h[i].get<std::string>()));
                } catch (const std::exception& e) {
                    rd.error(strfmt("data.holidays[%zu]", i), e.what());
                }
            }
        }
    }
    std::set<std::string> series_names;
    for (const auto& m : cfg.monthly) series_names.insert(m.name);
    for (const auto& d : cfg.daily) {
        if (!series_names.insert(d.name).second) rd.error("data.daily." + d.name, "name already used by a monthly series");
    }
    auto require_file = [&](const std::filesystem::path& p, const std::string& locus) {
        if (!p.empty() && !std::filesystem::is_regular_file(p)) rd.error(locus, "file '" + p.string() + "' does not exist");
    };
    require_file(cfg.target_path, "data.target");
    for (const auto& m : cfg.monthly) require_file(m.path, "data.monthly." + m.name);
    for (const auto& d : cfg.daily) require_file(d.path, "data.daily." + d.name);

    // plan
    const json plan = doc.value("plan", json::object());
    auto& p = cfg.plan;
    p.estimation_window_days = rd.get<int>(plan, "window_days", p.estimation_window_days, "plan");
    if (p.estimation_window_days < 1) rd.error("plan.window_days", "must be >= 1");
    p.horizons = rd.int_list(plan, "horizons", p.horizons, "plan");
    if (p.horizons.empty()) rd.error("plan.horizons", "horizons must be nonempty");
    for (std::size_t i = 0; i < p.horizons.size(); ++i) {
        if (p.horizons[i] < 1) rd.error(strfmt("plan.horizons[%zu]", i), "horizons must be ≥ 1");
    }
    if (std::set<int>(p.horizons.begin(), p.horizons.end()).size() != p.horizons.size()) {
        rd.error("plan.horizons", "horizons must be distinct");
    }
    const json eval = plan.value("evaluation", json::object());
    const auto first = rd.date(eval, "start", "plan.evaluation", true);
    auto last = rd.date(eval, "end", "plan.evaluation", false);
    if (!last && first) {
        const int days = rd.get<int>(eval, "days", 0, "plan.evaluation");
        if (days < 1) {
            rd.error("plan.evaluation", "needs 'end' or a positive 'days'");
        } else {
            last = add_days(*first, days - 1);
        }
    }
    if (first && last) {
        if (*last < *first) rd.error("plan.evaluation", "end precedes start");
        p.evaluation = {*first, *last};
    }
    p.refit_every = rd.get<int>(plan, "refit_every", p.refit_every, "plan");
    if (p.refit_every < 1) rd.error("plan.refit_every", "must be >= 1");
    p.density_components = static_cast<std::size_t>(
        rd.get<int>(plan, "density_components", static_cast<int>(p.density_components), "plan"));
    p.audit = rd.get<bool>(plan, "audit", p.audit, "plan");

    // models
    if (!doc.contains("models") || !doc.at("models").is_array() || doc.at("models").empty()) {
        rd.error("models", "a nonempty array of model specs is required");
    } else {
        const auto& ms = doc.at("models");
        std::set<std::string> names;
        for (std::size_t i = 0; i < ms.size(); ++i) {
            auto spec = parse_model(ms[i], strfmt("models[%zu]", i), rd);
            if (!spec.name.empty() && !names.insert(spec.name).second) {
                rd.error(strfmt("models[%zu].name", i), "duplicate model name '" + spec.name + "'");
            }
            for (const auto& lf : spec.lf_predictors) {
                if (std::none_of(cfg.monthly.begin(), cfg.monthly.end(),
                                 [&](const MonthlySource& s) { return s.name == lf.name; })) {
                    rd.error(strfmt("models[%zu].lf", i), "unknown monthly series '" + lf.name + "'");
                }
            }
            for (const auto& ex : spec.daily_exog) {
                if (std::none_of(cfg.daily.begin(), cfg.daily.end(),
                                 [&](const DailySource& s) { return s.name == ex.name; })) {
                    rd.error(strfmt("models[%zu].daily_exog", i), "unknown daily series '" + ex.name + "'");
                }
            }
            p.models.push_back(std::move(spec));
        }
    }
    cfg.benchmark = rd.get<std::string>(doc, "benchmark", p.models.empty() ? "" : p.models.front().name, "$");
    if (std::none_of(p.models.begin(), p.models.end(), [&](const ModelSpec& m) { return m.name == cfg.benchmark; })) {
        rd.error("benchmark", "'" + cfg.benchmark + "' is not one of the configured models");
    }

    // prior / mcmc
    const json prior = doc.value("prior", json::object());
    p.prior.coef_variance = rd.get<double>(prior, "coef_variance", p.prior.coef_variance, "prior");
    p.prior.shape = rd.get<double>(prior, "shape", p.prior.shape, "prior");
    p.prior.rate = rd.get<double>(prior, "rate", p.prior.rate, "prior");
    if (!(p.prior.coef_variance > 0.0) || !(p.prior.shape > 0.0) || !(p.prior.rate > 0.0)) {
        rd.error("prior", "coef_variance, shape and rate must be > 0");
    }
    const json mcmc = doc.value("mcmc", json::object());
    p.mcmc.n_draws = rd.get<int>(mcmc, "draws", p.mcmc.n_draws, "mcmc");
    p.mcmc.burn_in = rd.get<int>(mcmc, "burn_in", p.mcmc.burn_in, "mcmc");
    p.mcmc.thin = rd.get<int>(mcmc, "thin", p.mcmc.thin, "mcmc");
    try {
        p.mcmc.route = parse_sampler_route(rd.get<std::string>(mcmc, "sampler", "spectral", "mcmc"));
        p.mcmc.validate();
    } catch (const Error& e) {
        rd.error("mcmc", e.what());
    }

    // scoring
    const json sc = doc.value("scoring", json::object());
    cfg.scoring.alpha = rd.get<double>(sc, "alpha", cfg.scoring.alpha, "scoring");
    if (!(cfg.scoring.alpha > 0.0 && cfg.scoring.alpha < 1.0)) rd.error("scoring.alpha", "must be in (0, 1)");
    cfg.scoring.bootstrap.n_boot = rd.get<int>(sc, "n_boot", cfg.scoring.bootstrap.n_boot, "scoring");
    if (cfg.scoring.bootstrap.n_boot < 100) rd.error("scoring.n_boot", "must be >= 100");
    cfg.scoring.bootstrap.block_length = rd.get<int>(sc, "block_length", 0, "scoring");
    if (cfg.scoring.bootstrap.block_length < 0) rd.error("scoring.block_length", "must be >= 0");
    cfg.scoring.dm.small_sample_correction = rd.get<bool>(sc, "small_sample_dm", false, "scoring");

    p.seed = rd.get<std::uint64_t>(doc, "seed", 0, "$");
    cfg.scoring.bootstrap.seed = derive_seed(p.seed, 0x6d6373);  // "mcs"
    const auto out = rd.get<std::string>(doc, "output", "", "$");
    if (!out.empty()) cfg.output_dir = resolve(base_dir, out);
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    Diagnostics diag;
    auto base = std::filesystem::absolute(path).parent_path();
    auto cfg = parse_run_config(doc, base, path.string(), diag);
    if (!diag.ok()) {
        std::string msg;
        for (const auto& e : diag.errors) msg += (msg.empty() ? "" : "\n") + e;
        throw ConfigError(msg);
    }
    return cfg;
}

SeriesBundle load_bundle(const RunConfig& cfg) {
    SeriesBundle b;
    b.target = read_daily_csv(cfg.target_path);
    for (const auto& m : cfg.monthly) b.monthly.emplace(m.name, read_monthly_csv(m.path, cfg.holidays));
    for (const auto& d : cfg.daily) {
        auto s = read_daily_csv(d.path);
        if (d.interpolate) {
            try {
                s = interpolate_weekends(s);
            } catch (const InterpolationError& e) {
                throw InterpolationError(d.path.string() + ": " + e.what());
            }
        }
        b.daily.emplace(d.name, std::move(s));
    }
    return b;
}

void check_coverage(const RunConfig& cfg, const SeriesBundle& data, Diagnostics& diag) {
    const Date eval_start = cfg.plan.evaluation.first;
    for (const auto& m : cfg.monthly) {
        const auto& s = data.monthly.at(m.name);
        if (s.empty()) {
            diag.add(m.path.string() + ": monthly series is empty");
            continue;
        }
        const Date last_release = s.release_dates().back();
        if (last_release < eval_start) {
            const auto ym = s.months().back();
            diag.add(strfmt("%s: coverage ends with %04d-%02u (released %s), before evaluation start %s",
                            m.path.string().c_str(), static_cast<int>(ym.year()),
                            static_cast<unsigned>(ym.month()), format_iso_date(last_release).c_str(),
                            format_iso_date(eval_start).c_str()));
        }
    }
    if (data.target.last() < cfg.plan.evaluation.last) {
        diag.add(strfmt("%s: target ends %s, before evaluation end %s", cfg.target_path.string().c_str(),
                        format_iso_date(data.target.last()).c_str(),
                        format_iso_date(cfg.plan.evaluation.last).c_str()));
    }
    if (!diag.ok()) return;
    try {
        check_plan(cfg.plan, data);
    } catch (const Error& e) {
        diag.add(e.what());
    }
}

DgpSpec parse_dgp_config(const json& j, Diagnostics& diag) {
    Reader rd("dgp", diag);
    DgpSpec s;
    if (!j.is_object()) {
        rd.error("$", "expected an object");
        return s;
    }
    if (auto d = rd.date(j, "start", "$", false)) s.start = *d;
    s.n_days = static_cast<std::size_t>(rd.get<int>(j, "days", static_cast<int>(s.n_days), "$"));
    s.seed = rd.get<std::uint64_t>(j, "seed", s.seed, "$");
    const json lf = j.value("lf", json::object());
    s.lf_mean = rd.get<double>(lf, "mean", s.lf_mean, "lf");
    s.lf_rho = rd.get<double>(lf, "rho", s.lf_rho, "lf");
    s.lf_sigma = rd.get<double>(lf, "sigma", s.lf_sigma, "lf");
    const json daily = j.value("daily", json::object());
    s.intercept = rd.get<double>(daily, "intercept", s.intercept, "daily");
    s.sigma = rd.get<double>(daily, "sigma", s.sigma, "daily");
    auto dlist = [&](const char* key, std::vector<double> fallback) {
        if (!daily.contains(key)) return fallback;
        try {
            return daily.at(key).get<std::vector<double>>();
        } catch (const std::exception& e) {
            rd.error(std::string("daily.") + key, "expected an array of numbers");
            return fallback;
        }
    };
    s.ar = dlist("ar", s.ar);
    s.lf_loading = dlist("lf_loading", s.lf_loading);
    const auto seasonal = dlist("seasonal", {s.seasonal.begin(), s.seasonal.end()});
    if (seasonal.size() != 4) {
        rd.error("daily.seasonal", "expected four entries (spring, summer, autumn, winter)");
    } else {
        std::copy(seasonal.begin(), seasonal.end(), s.seasonal.begin());
    }
    if (j.contains("exog") && j.at("exog").is_boolean()) {
        s.exog = j.at("exog").get<bool>();
    } else if (j.contains("exog")) {
        const json ex = j.at("exog");
        s.exog = true;
        s.exog_mean = rd.get<double>(ex, "mean", s.exog_mean, "exog");
        s.exog_rho = rd.get<double>(ex, "rho", s.exog_rho, "exog");
        s.exog_sigma = rd.get<double>(ex, "sigma", s.exog_sigma, "exog");
    }
    if (j.contains("holidays")) {
        for (const auto& h : j.at("holidays")) {
            try {
                s.holidays.push_back(parse_iso_date(h.get<std::string>()));
            } catch (const std::exception& e) {
                rd.error("holidays", e.what());
            }
        }
    }
    return s;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace rumidas
