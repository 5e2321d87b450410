#include "rumidas/design.hpp"

#include <algorithm>
#include <set>

#include "rumidas/error.hpp"
#include "rumidas/format.hpp"

namespace rumidas {

namespace {

std::size_t seasonal_columns(const ModelSpec& spec) {
    if (!spec.seasonal_dummies) return 0;
    return spec.intercept ? 3 : 4;
}

}  // namespace

void ModelSpec::validate() const {
    const std::string who = name.empty() ? std::string("model") : "model '" + name + "'";
    if (k < 2) throw SpecError(who + ": k must be >= 2");
    if (!hf_lags.empty()) {
        if (!std::is_sorted(hf_lags.begin(), hf_lags.end()) ||
            std::adjacent_find(hf_lags.begin(), hf_lags.end()) != hf_lags.end()) {
            throw SpecError(who + ": hf_lags must be strictly increasing");
        }
        if (hf_lags.front() < 1) throw SpecError(who + ": hf_lags must be >= 1");
    }
    if (hf_lags.empty() && lf_predictors.empty()) {
        throw SpecError(who + ": hf_lags must be nonempty");
    }
    for (const auto& p : lf_predictors) {
        if (p.name.empty()) throw SpecError(who + ": LF predictor without a name");
        if (p.lags < 1) throw SpecError(who + ": LF predictor '" + p.name + "' needs lags >= 1");
    }
    for (const auto& e : daily_exog) {
        if (e.name.empty()) throw SpecError(who + ": daily regressor without a name");
        if (e.lags.empty()) throw SpecError(who + ": daily regressor '" + e.name + "' has no lags");
        for (int l : e.lags) {
            if (l < 1) throw SpecError(who + ": daily regressor '" + e.name + "' lag must be >= 1");
        }
    }
    if (scheme == PeriodScheme::kFixedBlock && uses_periods()) {
        if (lf_predictors.empty()) {
            throw SpecError(who + ": fixed_block periods need an LF predictor to anchor releases");
        }
        if (!period_anchor.empty() &&
            std::none_of(lf_predictors.begin(), lf_predictors.end(),
                         [&](const LfPredictor& p) { return p.name == period_anchor; })) {
            throw SpecError(who + ": period_anchor '" + period_anchor +
                            "' is not one of its LF predictors");
        }
    }
    const auto names = column_names();
    if (names.empty()) throw SpecError(who + ": no regressor group is active");
    std::set<std::string> seen;
    for (const auto& n : names) {
        if (!seen.insert(n).second) throw SpecError(who + ": duplicate column name '" + n + "'");
    }
}

std::size_t ModelSpec::column_count() const {
    const std::size_t kk = static_cast<std::size_t>(k);
    std::size_t n = hf_lags.size() * (interact_hf_lags ? kk : 1);
    for (const auto& p : lf_predictors) n += kk * static_cast<std::size_t>(p.lags);
    for (const auto& e : daily_exog) n += e.lags.size();
    return n + seasonal_columns(*this) + (intercept ? 1 : 0);
}

std::vector<std::string> ModelSpec::column_names() const {
    std::vector<std::string> names;
    names.reserve(column_count());
    for (const auto& p : lf_predictors) {
        for (int l = 1; l <= p.lags; ++l) {
            for (int i = 1; i <= k; ++i) names.push_back(strfmt("%s_l%d_p%d", p.name.c_str(), l, i));
        }
    }
    for (int j : hf_lags) {
        if (interact_hf_lags) {
            for (int i = 1; i <= k; ++i) names.push_back(strfmt("lag%d_p%d", j, i));
        } else {
            names.push_back(strfmt("lag%d", j));
        }
    }
    for (const auto& e : daily_exog) {
        for (int l : e.lags) names.push_back(strfmt("%s_lag%d", e.name.c_str(), l));
    }
    if (seasonal_dummies) {
        names.emplace_back("spring");
        names.emplace_back("summer");
        names.emplace_back("autumn");
        if (!intercept) names.emplace_back("winter");
    }
    if (intercept) names.emplace_back("intercept");
    return names;
}

int ModelSpec::max_hf_lag() const {
    int m = hf_lags.empty() ? 0 : hf_lags.back();
    for (const auto& e : daily_exog) {
        for (int l : e.lags) m = std::max(m, l);
    }
    return m;
}

ModelSpec benchmark_spec(BenchmarkOrder order, std::string name) {
    ModelSpec s;
    s.interact_hf_lags = false;
    s.seasonal_dummies = true;
    s.intercept = false;
    if (order == BenchmarkOrder::kAR1) {
        s.name = name.empty() ? "BAR1" : std::move(name);
        s.hf_lags = {1};
    } else {
        s.name = name.empty() ? "BAR3" : std::move(name);
        s.hf_lags = {1, 2, 7};
    }
    return s;
}

// ---------------------------------------------------------------------------

DesignBuilder::DesignBuilder(ModelSpec spec, const SeriesBundle& data)
    : spec_(std::move(spec)), target_(std::make_shared<const DailySeries>(data.target)) {
    spec_.validate();
    if (target_->empty()) throw DesignError("target series is empty");
    for (const auto& p : spec_.lf_predictors) {
        const auto it = data.monthly.find(p.name);
        if (it == data.monthly.end()) {
            throw SpecError("model '" + spec_.name + "' references unknown monthly series '" +
                            p.name + "'");
        }
        lf_.push_back(&it->second);
    }
    for (const auto& e : spec_.daily_exog) {
        const auto it = data.daily.find(e.name);
        if (it == data.daily.end()) {
            throw SpecError("model '" + spec_.name + "' references unknown daily series '" +
                            e.name + "'");
        }
        exog_.push_back(&it->second);
    }
    if (spec_.uses_periods()) {
        std::vector<Date> anchor;
        if (spec_.scheme == PeriodScheme::kFixedBlock) {
            std::size_t a = 0;
            for (std::size_t i = 0; i < spec_.lf_predictors.size(); ++i) {
                if (spec_.lf_predictors[i].name == spec_.period_anchor) a = i;
            }
            const auto rel = lf_[a]->release_dates();
            anchor.assign(rel.begin(), rel.end());
        }
        periods_.emplace(spec_.k, spec_.scheme, std::move(anchor));
    }
    names_ = spec_.column_names();
}

std::optional<RegressorRow> DesignBuilder::row(Date t) const {
    RegressorRow out;
    out.z = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(names_.size()));
    out.period = periods_ ? periods_->index_of(t) : 0;
    const Date info_limit = add_days(t, -1);
    Date info = Date{} - std::chrono::days{1000000};
    const Eigen::Index k = spec_.k;
    const Eigen::Index slot = out.period - 1;
    Eigen::Index col = 0;

    for (std::size_t p = 0; p < lf_.size(); ++p) {
        const auto idx = lf_[p]->latest_released(info_limit);
        for (int l = 1; l <= spec_.lf_predictors[p].lags; ++l) {
            if (!idx || *idx + 1 < static_cast<std::size_t>(l)) return std::nullopt;
            const std::size_t m = *idx + 1 - static_cast<std::size_t>(l);
            out.z[col + slot] = lf_[p]->values()[m];
            info = std::max(info, lf_[p]->release_dates()[m]);
            col += k;
        }
    }
    for (int j : spec_.hf_lags) {
        const Date d = add_days(t, -j);
        const double v = target_->at(d);
        if (is_missing(v)) return std::nullopt;
        info = std::max(info, d);
        if (spec_.interact_hf_lags) {
            out.z[col + slot] = v;
            col += k;
        } else {
            out.z[col++] = v;
        }
    }
    for (std::size_t e = 0; e < exog_.size(); ++e) {
        for (int l : spec_.daily_exog[e].lags) {
            const Date d = add_days(t, -l);
            const double v = exog_[e]->at(d);
            if (is_missing(v)) return std::nullopt;
            info = std::max(info, d);
            out.z[col++] = v;
        }
    }
    if (spec_.seasonal_dummies) {
        const auto s = static_cast<Eigen::Index>(season_of(t));
        if (s < 3 || !spec_.intercept) out.z[col + s] = 1.0;
        col += spec_.intercept ? 3 : 4;
    }
    if (spec_.intercept) out.z[col++] = 1.0;
    out.info_date = info;
    return out;
}

DesignMatrix DesignBuilder::build(DateRange window) const {
    if (window.last < window.first) throw DesignError("design window is empty");
    const auto n_days = static_cast<std::size_t>(days_between(window.first, window.last) + 1);
    const auto p = static_cast<Eigen::Index>(names_.size());

    DesignMatrix dm;
    dm.column_names = names_;
    dm.regressand = target_;
    dm.horizon = 1;
    Eigen::MatrixXd X(static_cast<Eigen::Index>(n_days), p);
    Eigen::VectorXd y(static_cast<Eigen::Index>(n_days));
    Eigen::Index r = 0;
    for (std::size_t i = 0; i < n_days; ++i) {
        const Date t = add_days(window.first, static_cast<long>(i));
        const double target = target_->at(t);
        if (is_missing(target)) continue;
        auto reg = row(t);
        if (!reg) continue;
        X.row(r) = reg->z.transpose();
        y[r] = target;
        dm.row_dates.push_back(t);
        dm.info_dates.push_back(reg->info_date);
        dm.periods.push_back(reg->period);
        ++r;
    }
    if (r == 0) {
        throw DesignError("window " + format_iso_date(window.first) + ".." +
                          format_iso_date(window.last) + " yields no complete row for model '" +
                          spec_.name + "'");
    }
    dm.X = X.topRows(r);
    dm.y = y.head(r);
    return dm;
}

DesignMatrix build_rumidas(const ModelSpec& spec, const SeriesBundle& data, DateRange window) {
    return DesignBuilder(spec, data).build(window);
}

DesignMatrix build_benchmark(BenchmarkOrder order, const DailySeries& target, DateRange window) {
    SeriesBundle data;
    data.target = target;
    return DesignBuilder(benchmark_spec(order), data).build(window);
}

DesignMatrix horizon_shift(const DesignMatrix& design, int h) {
    if (h < 1) throw DesignError("horizon must be >= 1");
    if (h == design.horizon) return design;
    if (!design.regressand) throw DesignError("design has no regressand source to shift");

    std::vector<Eigen::Index> keep;
    std::vector<double> y;
    std::vector<Date> dates;
    for (std::size_t r = 0; r < design.rows(); ++r) {
        const Date target_date = add_days(design.regressor_date(r), h - 1);
        const double v = design.regressand->at(target_date);
        if (is_missing(v)) continue;
        keep.push_back(static_cast<Eigen::Index>(r));
        y.push_back(v);
        dates.push_back(target_date);
    }
    if (keep.empty()) {
        throw DesignError("horizon " + std::to_string(h) + " exceeds the usable sample of " +
                          std::to_string(design.rows()) + " rows");
    }
    DesignMatrix out;
    out.column_names = design.column_names;
    out.regressand = design.regressand;
    out.horizon = h;
    out.X = design.X(keep, Eigen::all);
    out.y = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
    out.row_dates = std::move(dates);
    for (auto r : keep) {
        out.info_dates.push_back(design.info_dates[static_cast<std::size_t>(r)]);
        out.periods.push_back(design.periods[static_cast<std::size_t>(r)]);
    }
    return out;
}

void write_design_csv(const DesignMatrix& design, std::ostream& out) {
    out << "date,y";
    for (const auto& n : design.column_names) out << ',' << n;
    out << '\n';
    for (std::size_t r = 0; r < design.rows(); ++r) {
        out << format_iso_date(design.row_dates[r]) << ',' << format_double(design.y[static_cast<Eigen::Index>(r)]);
        for (Eigen::Index c = 0; c < design.X.cols(); ++c) {
            out << ',' << format_double(design.X(static_cast<Eigen::Index>(r), c));
        }
        out << '\n';
    }
}

}  // namespace rumidas
