#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rumidas/bayes.hpp"
#include "rumidas/design.hpp"
#include "rumidas/record.hpp"

namespace rumidas {

/// Hyperparameters applied to every model: N(0, coef_variance * I) on the
/// coefficients, Ga(shape, rate) on the precision.
struct PriorSettings {
    double coef_variance = 1e6;
    double shape = 0.01;
    double rate = 0.01;

    NormalGammaPrior for_dim(std::size_t p) const {
        return NormalGammaPrior::diffuse(p, coef_variance, shape, rate);
    }
};

struct ForecastPlan {
    int estimation_window_days = 7 * 365;
    std::vector<int> horizons{1, 2, 3, 7, 14, 21, 28};
    DateRange evaluation{};  // forecast origins, inclusive
    std::vector<ModelSpec> models;
    int refit_every = 1;
    PriorSettings prior{};
    McmcConfig mcmc = [] {
        McmcConfig c;
        c.route = SamplerRoute::kSpectral;
        return c;
    }();
    std::uint64_t seed = 0;
    /// Mixture components kept per record for density scoring (0 keeps all).
    std::size_t density_components = 500;
    int jobs = 1;
    /// Check every window and forecast row for information past the origin.
    bool audit = false;

    void validate() const;
    std::size_t origin_count() const;
};

struct AuditReport {
    std::size_t fits = 0;
    std::size_t window_rows = 0;
    std::size_t forecast_rows = 0;
    std::size_t violations = 0;
    std::vector<std::string> messages;  // first few violations
};

struct ForecastRun {
    /// Ordered by model, then horizon, then origin.
    std::vector<ForecastRecord> records;
    AuditReport audit;
};

/// Rolling-window direct forecasts for every origin x model x horizon.
/// Plan or spec problems throw before any sampling; a window with missing
/// days throws WindowError. Failures inside a fit become errored records.
ForecastRun run_plan(const ForecastPlan& plan, const SeriesBundle& data);

/// Runs every check `run_plan` performs before sampling.
void check_plan(const ForecastPlan& plan, const SeriesBundle& data);

/// Daily-target DGP driven by a monthly AR(1) predictor:
///   y_m = mu + rho (y_{m-1} - mu) + s_y u_m                  (monthly)
///   x_t = c0 + sum_i c_i x_{t-i} + sum_j d_j Y(t-j) + season(t) + s e_t
/// where Y(s) is the latest y released on or before day s.
struct DgpSpec {
    Date start = make_date(2006, 1, 1);
    std::size_t n_days = 5114;
    double lf_mean = 100.0;
    double lf_rho = 0.8;
    double lf_sigma = 2.0;
    double intercept = 0.0;
    std::vector<double> ar{0.5};
    std::vector<double> lf_loading{0.5};
    std::array<double, 4> seasonal{0.0, 0.0, 0.0, 0.0};  // spring, summer, autumn, winter
    double sigma = 1.0;
    bool exog = true;
    double exog_mean = 60.0;
    double exog_rho = 0.98;
    double exog_sigma = 1.0;
    std::vector<Date> holidays;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SimulatedData {
    DailySeries target;
    MonthlyReleaseSeries monthly;
    /// Daily exogenous series with weekends left missing, as traded data arrives.
    DailySeries exog_weekdays;

    /// Bundle with the monthly series as "macro" and the weekend-interpolated
    /// exogenous series as "oil".
    SeriesBundle bundle() const;
};

SimulatedData simulate_dgp(const DgpSpec& spec);

}  // namespace rumidas
