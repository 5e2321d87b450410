#include "rumidas/forecast.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <numeric>
#include <random>
#include <set>
#include <thread>

#include "rumidas/error.hpp"
#include "rumidas/format.hpp"

namespace rumidas {

void ForecastPlan::validate() const {
    if (estimation_window_days < 1) throw SpecError("estimation_window_days must be >= 1");
    if (horizons.empty()) throw SpecError("horizons must be nonempty");
    for (int h : horizons) {
        if (h < 1) throw SpecError("horizons must be >= 1");
    }
    if (std::set<int>(horizons.begin(), horizons.end()).size() != horizons.size()) {
        throw SpecError("horizons must be distinct");
    }
    if (evaluation.last < evaluation.first) throw SpecError("evaluation range is empty");
    if (models.empty()) throw SpecError("plan has no models");
    std::set<std::string> names;
    for (const auto& m : models) {
        if (m.name.empty()) throw SpecError("every model needs a name");
        if (!names.insert(m.name).second) throw SpecError("duplicate model name '" + m.name + "'");
        m.validate();
    }
    if (refit_every < 1) throw SpecError("refit_every must be >= 1");
    if (jobs < 1) throw SpecError("jobs must be >= 1");
    if (!(prior.coef_variance > 0.0) || !(prior.shape > 0.0) || !(prior.rate > 0.0)) {
        throw SpecError("prior settings must be positive");
    }
    mcmc.validate();
}

std::size_t ForecastPlan::origin_count() const {
    return static_cast<std::size_t>(days_between(evaluation.first, evaluation.last) + 1);
}

namespace {

struct CellDesign {
    DesignMatrix design;  // shifted to the cell's horizon
    std::size_t model = 0;
    int horizon = 1;
};

struct Task {
    std::size_t cell = 0;
    std::size_t first_origin = 0;  // offset into the evaluation range
    std::size_t n_origins = 0;
    std::size_t window_begin = 0;  // design rows [begin, end)
    std::size_t window_end = 0;
};

void note_violation(AuditReport& audit, std::string msg) {
    ++audit.violations;
    if (audit.messages.size() < 20) audit.messages.push_back(std::move(msg));
}

struct Prepared {
    std::vector<DesignBuilder> builders;
    std::vector<CellDesign> cells;
    std::vector<Task> tasks;
    std::size_t n_origins = 0;
};

// Everything short of sampling: spec resolution, designs, and window coverage.
Prepared prepare(const ForecastPlan& plan, const SeriesBundle& data) {
    plan.validate();
    if (data.target.empty()) throw SpecError("target series is empty");

    Prepared prep;
    prep.builders.reserve(plan.models.size());
    for (const auto& spec : plan.models) prep.builders.emplace_back(spec, data);

    const DateRange full{data.target.start(), data.target.last()};
    for (std::size_t m = 0; m < prep.builders.size(); ++m) {
        const DesignMatrix base = prep.builders[m].build(full);
        for (int h : plan.horizons) prep.cells.push_back({horizon_shift(base, h), m, h});
    }

    prep.n_origins = plan.origin_count();
    const auto W = static_cast<std::size_t>(plan.estimation_window_days);
    for (std::size_t c = 0; c < prep.cells.size(); ++c) {
        const auto& rows = prep.cells[c].design.row_dates;
        for (std::size_t first = 0; first < prep.n_origins;
             first += static_cast<std::size_t>(plan.refit_every)) {
            const Date fit_origin = add_days(plan.evaluation.first, static_cast<long>(first));
            const Date window_first = add_days(fit_origin, -static_cast<long>(W) + 1);
            const auto lo = std::lower_bound(rows.begin(), rows.end(), window_first);
            const auto hi = std::upper_bound(rows.begin(), rows.end(), fit_origin);
            const auto count = static_cast<std::size_t>(hi - lo);
            if (count != W) {
                throw WindowError(strfmt(
                    "estimation window %s..%s for model '%s' at horizon %d has %zu of %zu usable rows",
                    format_iso_date(window_first).c_str(), format_iso_date(fit_origin).c_str(),
                    plan.models[prep.cells[c].model].name.c_str(), prep.cells[c].horizon, count, W));
            }
            Task t;
            t.cell = c;
            t.first_origin = first;
            t.n_origins = std::min<std::size_t>(static_cast<std::size_t>(plan.refit_every),
                                                prep.n_origins - first);
            t.window_begin = static_cast<std::size_t>(lo - rows.begin());
            t.window_end = static_cast<std::size_t>(hi - rows.begin());
            prep.tasks.push_back(t);
        }
    }
    return prep;
}

}  // namespace

void check_plan(const ForecastPlan& plan, const SeriesBundle& data) { prepare(plan, data); }

ForecastRun run_plan(const ForecastPlan& plan, const SeriesBundle& data) {
    const Prepared prep = prepare(plan, data);
    const auto& builders = prep.builders;
    const auto& cells = prep.cells;
    const auto& tasks = prep.tasks;
    const std::size_t n_origins = prep.n_origins;

    ForecastRun run;
    run.records.resize(cells.size() * n_origins);
    std::mutex audit_mutex;

    auto execute = [&](const Task& task) {
        const auto& cell = cells[task.cell];
        const auto& dm = cell.design;
        const auto& builder = builders[cell.model];
        const std::string& model_name = plan.models[cell.model].name;
        const int h = cell.horizon;
        const Date fit_origin = add_days(plan.evaluation.first, static_cast<long>(task.first_origin));

        AuditReport local;
        if (plan.audit) {
            ++local.fits;
            for (std::size_t r = task.window_begin; r < task.window_end; ++r) {
                ++local.window_rows;
                const Date target = dm.row_dates[r];
                const Date info = dm.info_dates[r];
                if (target > fit_origin) {
                    note_violation(local, strfmt("%s h=%d origin %s: window row targets %s", model_name.c_str(), h,
                                                 format_iso_date(fit_origin).c_str(), format_iso_date(target).c_str()));
                }
                if (info >= add_days(target, -(h - 1))) {
                    note_violation(local, strfmt("%s h=%d: row %s uses information dated %s", model_name.c_str(), h,
                                                 format_iso_date(target).c_str(), format_iso_date(info).c_str()));
                }
            }
        }

        std::string failure;
        PosteriorDraws draws;
        try {
            const auto rows = static_cast<Eigen::Index>(task.window_end - task.window_begin);
            const auto begin = static_cast<Eigen::Index>(task.window_begin);
            const auto moments =
                RegressionMoments::from(dm.X.middleRows(begin, rows), dm.y.segment(begin, rows));
            McmcConfig cfg = plan.mcmc;
            cfg.seed = derive_seed(plan.seed, cell.model, static_cast<std::uint64_t>(h),
                                   static_cast<std::uint64_t>(fit_origin.time_since_epoch().count()));
            draws = gibbs_sample(moments, plan.prior.for_dim(dm.cols()), cfg, dm.column_names);
        } catch (const Error& e) {
            failure = e.what();
        }

        for (std::size_t k = 0; k < task.n_origins; ++k) {
            const std::size_t o = task.first_origin + k;
            const Date origin = add_days(plan.evaluation.first, static_cast<long>(o));
            ForecastRecord& rec = run.records[task.cell * n_origins + o];
            rec.model = model_name;
            rec.origin = origin;
            rec.horizon = h;
            rec.target = add_days(origin, h);
            rec.realized = data.target.at(rec.target);
            if (!failure.empty()) {
                rec.error = failure;
                continue;
            }
            const auto row = builder.row(add_days(origin, 1));
            if (!row) {
                rec.error = "regressors unavailable at origin " + format_iso_date(origin);
                continue;
            }
            if (plan.audit) {
                ++local.forecast_rows;
                if (row->info_date > origin) {
                    note_violation(local, strfmt("%s h=%d origin %s: forecast row uses %s", model_name.c_str(), h,
                                                 format_iso_date(origin).c_str(),
                                                 format_iso_date(row->info_date).c_str()));
                }
            }
            const auto pred = posterior_predictive(draws, row->z);
            rec.mean = pred.mean();
            rec.predictive = pred.thinned(plan.density_components);
        }

        if (plan.audit) {
            std::lock_guard lock(audit_mutex);
            run.audit.fits += local.fits;
            run.audit.window_rows += local.window_rows;
            run.audit.forecast_rows += local.forecast_rows;
            run.audit.violations += local.violations;
            for (auto& m : local.messages) {
                if (run.audit.messages.size() < 20) run.audit.messages.push_back(std::move(m));
            }
        }
    };

    const auto n_workers = std::min<std::size_t>(static_cast<std::size_t>(plan.jobs), tasks.size());
    if (n_workers <= 1) {
        for (const auto& t : tasks) execute(t);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        workers.reserve(n_workers);
        for (std::size_t w = 0; w < n_workers; ++w) {
            workers.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1)) execute(tasks[i]);
            });
        }
        for (auto& w : workers) w.join();
    }
    return run;
}

// ---------------------------------------------------------------------------

void DgpSpec::validate() const {
    if (n_days < 2) throw SpecError("DGP length must be >= 2 days");
    if (!(std::abs(lf_rho) < 1.0)) throw SpecError("explosive monthly AR coefficient");
    if (exog && !(std::abs(exog_rho) < 1.0)) throw SpecError("explosive exogenous AR coefficient");
    if (sigma < 0.0 || lf_sigma < 0.0 || exog_sigma < 0.0) throw SpecError("DGP noise scales must be >= 0");
    if (!ar.empty()) {
        const auto p = static_cast<Eigen::Index>(ar.size());
        Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
        for (Eigen::Index i = 0; i < p; ++i) companion(0, i) = ar[static_cast<std::size_t>(i)];
        for (Eigen::Index i = 1; i < p; ++i) companion(i, i - 1) = 1.0;
        const double radius = companion.eigenvalues().cwiseAbs().maxCoeff();
        if (!(radius < 1.0)) {
            throw SpecError(strfmt("explosive daily AR polynomial (spectral radius %.4f)", radius));
        }
    }
}

SeriesBundle SimulatedData::bundle() const {
    SeriesBundle b;
    b.target = target;
    b.monthly.emplace("macro", monthly);
    if (!exog_weekdays.empty()) b.daily.emplace("oil", interpolate_weekends(exog_weekdays));
    return b;
}

SimulatedData simulate_dgp(const DgpSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> nd(0.0, 1.0);

    constexpr long kBurnDays = 365;
    const Date sim_start = add_days(spec.start, -kBurnDays);
    const Date end = add_days(spec.start, static_cast<long>(spec.n_days) - 1);
    const std::chrono::year_month_day first_ymd{sim_start};
    const std::chrono::year_month_day end_ymd{end};
    YearMonth month = YearMonth{first_ymd.year(), first_ymd.month()} - std::chrono::months{3};
    const YearMonth last_month{end_ymd.year(), end_ymd.month()};

    std::vector<YearMonth> months;
    std::vector<double> lf;
    double y = spec.lf_mean;
    for (; month <= last_month; month += std::chrono::months{1}) {
        y = spec.lf_mean + spec.lf_rho * (y - spec.lf_mean) + spec.lf_sigma * nd(rng);
        months.push_back(month);
        lf.push_back(y);
    }
    auto monthly = MonthlyReleaseSeries::with_first_working_day(std::move(months), std::move(lf), spec.holidays);

    const std::size_t total = spec.n_days + static_cast<std::size_t>(kBurnDays);
    const double ar_sum = std::accumulate(spec.ar.begin(), spec.ar.end(), 0.0);
    const double load_sum = std::accumulate(spec.lf_loading.begin(), spec.lf_loading.end(), 0.0);
    const double x0 = (spec.intercept + load_sum * spec.lf_mean) / (1.0 - ar_sum);
    std::vector<double> x(total, x0);
    auto released = [&](Date d) {
        const auto idx = monthly.latest_released(d);
        return idx ? monthly.values()[*idx] : spec.lf_mean;
    };
    for (std::size_t t = 0; t < total; ++t) {
        const Date d = add_days(sim_start, static_cast<long>(t));
        double v = spec.intercept + spec.seasonal[static_cast<std::size_t>(season_of(d))];
        for (std::size_t i = 0; i < spec.ar.size(); ++i) {
            v += spec.ar[i] * (t > i ? x[t - i - 1] : x0);
        }
        for (std::size_t j = 0; j < spec.lf_loading.size(); ++j) {
            v += spec.lf_loading[j] * released(add_days(d, -static_cast<long>(j) - 1));
        }
        x[t] = v + spec.sigma * nd(rng);
    }

    SimulatedData out;
    out.target = DailySeries(spec.start, std::vector<double>(x.begin() + kBurnDays, x.end()));
    out.monthly = std::move(monthly);
    if (spec.exog) {
        std::vector<double> e(spec.n_days);
        double level = spec.exog_mean;
        for (std::size_t t = 0; t < spec.n_days; ++t) {
            level = spec.exog_mean + spec.exog_rho * (level - spec.exog_mean) + spec.exog_sigma * nd(rng);
            e[t] = level;
        }
        // Traded series are only observed on weekdays; keep the endpoints so
        // interpolation never extrapolates.
        for (std::size_t t = 1; t + 1 < spec.n_days; ++t) {
            if (is_weekend(add_days(spec.start, static_cast<long>(t)))) e[t] = kMissing;
        }
        out.exog_weekdays = DailySeries(spec.start, std::move(e));
    }
    return out;
}

}  // namespace rumidas
