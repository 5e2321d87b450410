#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rumidas {

using Date = std::chrono::sys_days;
using YearMonth = std::chrono::year_month;

/// Marker for an unavailable daily observation.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return std::isnan(v); }

Date make_date(int year, unsigned month, unsigned day);
Date parse_iso_date(std::string_view text);
std::string format_iso_date(Date d);

inline Date add_days(Date d, long n) { return d + std::chrono::days{n}; }
inline long days_between(Date from, Date to) { return (to - from).count(); }

/// Meteorological seasons, ordered as they appear in design matrices.
enum class Season { kSpring = 0, kSummer = 1, kAutumn = 2, kWinter = 3 };
Season season_of(Date d);
std::string_view season_name(Season s);

bool is_weekend(Date d);

/// First Monday-to-Friday day of `month` that is not listed in `holidays`.
Date first_working_day(YearMonth month, std::span<const Date> holidays = {});

/// Contiguous calendar-indexed daily observations. Values may carry
/// `kMissing`; infinities are rejected.
class DailySeries {
public:
    DailySeries() = default;
    DailySeries(Date start, std::vector<double> values);

    /// Builds from explicit dates, which must advance by exactly one day.
    static DailySeries from_dates(std::span<const Date> dates, std::vector<double> values);

    Date start() const { return start_; }
    Date last() const { return add_days(start_, static_cast<long>(values_.size()) - 1); }
    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }

    Date date_at(std::size_t i) const { return add_days(start_, static_cast<long>(i)); }
    double operator[](std::size_t i) const { return values_[i]; }
    std::span<const double> values() const { return values_; }

    bool contains(Date d) const;
    std::optional<std::size_t> index_of(Date d) const;
    /// Value on `d`, or `kMissing` outside the covered range.
    double at(Date d) const;

    bool is_complete() const;
    std::size_t missing_count() const;

    bool operator==(const DailySeries& other) const;

private:
    Date start_{};
    std::vector<double> values_;
};

/// Monthly observations together with the day each one becomes usable.
class MonthlyReleaseSeries {
public:
    MonthlyReleaseSeries() = default;
    MonthlyReleaseSeries(std::vector<YearMonth> months, std::vector<double> values,
                         std::vector<Date> release_dates);

    /// Release dates synthesized as the first working day of the following month.
    static MonthlyReleaseSeries with_first_working_day(std::vector<YearMonth> months,
                                                       std::vector<double> values,
                                                       std::span<const Date> holidays = {});

    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }
    std::span<const YearMonth> months() const { return months_; }
    std::span<const double> values() const { return values_; }
    std::span<const Date> release_dates() const { return release_dates_; }

    /// Index of the most recent month released on or before `d`.
    std::optional<std::size_t> latest_released(Date d) const;

private:
    std::vector<YearMonth> months_;
    std::vector<double> values_;
    std::vector<Date> release_dates_;
};

/// Daily step series of released monthly values over [start, start + n_days).
/// `lag` = 1 uses the latest release, 2 the one before it, and so on. Dates on
/// which fewer than `lag` values have been released carry `kMissing`.
DailySeries align_monthly_to_daily(const MonthlyReleaseSeries& monthly, Date start,
                                   std::size_t n_days, int lag = 1);

/// Fills interior gaps linearly between nearest observed neighbours.
DailySeries interpolate_weekends(const DailySeries& series);

enum class PeriodScheme { kFixedBlock, kCalendarDay };

PeriodScheme parse_period_scheme(std::string_view text);
std::string_view period_scheme_name(PeriodScheme s);

/// Within-block period index in {1, ..., k} for a row whose information set
/// ends the day before `date`. FixedBlock counts days since the latest release
/// strictly before `date` (clamped at k; k when nothing has been released yet).
/// CalendarDay is min(day-of-month, k).
int period_index(Date date, int k, PeriodScheme scheme, std::span<const Date> release_dates);

class PeriodIndex {
public:
    PeriodIndex(int k, PeriodScheme scheme, std::vector<Date> release_dates = {});

    int k() const { return k_; }
    PeriodScheme scheme() const { return scheme_; }
    int index_of(Date d) const { return period_index(d, k_, scheme_, release_dates_); }

private:
    int k_;
    PeriodScheme scheme_;
    std::vector<Date> release_dates_;
};

}  // namespace rumidas
