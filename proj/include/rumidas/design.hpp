#pragma once

#include <Eigen/Dense>

#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rumidas/calendar.hpp"

namespace rumidas {

struct LfPredictor {
    std::string name;
    int lags = 1;
};

struct DailyExog {
    std::string name;
    std::vector<int> lags{1};
};

/// Regressor layout of one forecasting model.
///
/// With `interact_hf_lags` each HF lag j contributes k columns, one per
/// within-block period, holding x_{t-j} in the column of the row's period and
/// zero elsewhere. LF predictors always use that dummy-interacted layout. The
/// benchmark autoregressions switch the interaction off.
struct ModelSpec {
    std::string name;
    std::vector<int> hf_lags{1, 2, 7};
    bool interact_hf_lags = true;
    std::vector<LfPredictor> lf_predictors;
    std::vector<DailyExog> daily_exog;
    bool seasonal_dummies = true;
    bool intercept = false;
    int k = 28;
    PeriodScheme scheme = PeriodScheme::kFixedBlock;
    /// LF predictor whose release dates delimit the FixedBlock periods.
    /// Empty selects the first LF predictor.
    std::string period_anchor;

    /// Throws SpecError on a malformed spec (including duplicate column names).
    void validate() const;
    bool uses_periods() const { return interact_hf_lags || !lf_predictors.empty(); }
    std::size_t column_count() const;
    std::vector<std::string> column_names() const;
    int max_hf_lag() const;
};

enum class BenchmarkOrder { kAR1, kAR3 };

/// BAR(1) uses lag 1; BAR(3) uses lags {1, 2, 7}. Both carry the four season
/// indicators and no intercept.
ModelSpec benchmark_spec(BenchmarkOrder order, std::string name = {});

/// Daily target plus every named series a spec may reference.
struct SeriesBundle {
    DailySeries target;
    std::map<std::string, MonthlyReleaseSeries> monthly;
    std::map<std::string, DailySeries> daily;
};

struct DateRange {
    Date first;
    Date last;  // inclusive
};

/// Regressand/regressor pair for direct forecasting at `horizon`.
///
/// Row r regresses the target dated `row_dates[r]` on information available
/// through `regressor_date(r) - 1`, where regressor_date = row date - (horizon-1).
/// `info_dates[r]` is the latest observation or release date any regressor of
/// that row actually consumed.
struct DesignMatrix {
    Eigen::VectorXd y;
    Eigen::MatrixXd X;
    std::vector<std::string> column_names;
    std::vector<Date> row_dates;
    std::vector<Date> info_dates;
    std::vector<int> periods;
    int horizon = 1;
    std::shared_ptr<const DailySeries> regressand;

    std::size_t rows() const { return row_dates.size(); }
    std::size_t cols() const { return column_names.size(); }
    Date regressor_date(std::size_t r) const { return add_days(row_dates[r], -(horizon - 1)); }
};

struct RegressorRow {
    Eigen::VectorXd z;
    Date info_date;
    int period = 0;
};

/// Evaluates regressor rows for one spec against one bundle. Construction
/// validates the ModelSpec and resolves every referenced series.
class DesignBuilder {
public:
    DesignBuilder(ModelSpec spec, const SeriesBundle& data);

    const ModelSpec& spec() const { return spec_; }
    const std::vector<std::string>& column_names() const { return names_; }

    /// Regressors for a row dated `t` (information through t-1), or nullopt
    /// when any input is unavailable.
    std::optional<RegressorRow> row(Date t) const;

    /// Rows for every date in `window` whose target and regressors exist.
    DesignMatrix build(DateRange window) const;

private:
    ModelSpec spec_;
    std::shared_ptr<const DailySeries> target_;
    std::vector<const MonthlyReleaseSeries*> lf_;
    std::vector<const DailySeries*> exog_;
    std::optional<PeriodIndex> periods_;
    std::vector<std::string> names_;
};

DesignMatrix build_rumidas(const ModelSpec& spec, const SeriesBundle& data, DateRange window);

DesignMatrix build_benchmark(BenchmarkOrder order, const DailySeries& target, DateRange window);

/// Re-targets a horizon-1 design to the direct h-step regressand x_{t+h-1}.
/// Rows without a future observation are dropped.
DesignMatrix horizon_shift(const DesignMatrix& design, int h);

void write_design_csv(const DesignMatrix& design, std::ostream& out);

}  // namespace rumidas
