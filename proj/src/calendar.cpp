#include "rumidas/calendar.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

#include "rumidas/error.hpp"

namespace rumidas {

namespace {

int parse_int(std::string_view text, std::string_view whole) {
    int value = 0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || text.empty()) {
        throw IoError("invalid ISO date '" + std::string(whole) + "'");
    }
    return value;
}

}  // namespace

Date make_date(int year, unsigned month, unsigned day) {
    const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                          std::chrono::day{day}};
    if (!ymd.ok()) {
        throw IoError("invalid calendar date " + std::to_string(year) + "-" +
                      std::to_string(month) + "-" + std::to_string(day));
    }
    return Date{ymd};
}

Date parse_iso_date(std::string_view text) {
    // YYYY-MM-DD
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        throw IoError("invalid ISO date '" + std::string(text) + "'");
    }
    const int y = parse_int(text.substr(0, 4), text);
    const int m = parse_int(text.substr(5, 2), text);
    const int d = parse_int(text.substr(8, 2), text);
    if (m < 1 || m > 12 || d < 1 || d > 31) {
        throw IoError("invalid ISO date '" + std::string(text) + "'");
    }
    return make_date(y, static_cast<unsigned>(m), static_cast<unsigned>(d));
}

std::string format_iso_date(Date d) {
    const std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

Season season_of(Date d) {
    const unsigned m = static_cast<unsigned>(std::chrono::year_month_day{d}.month());
    if (m >= 3 && m <= 5) return Season::kSpring;
    if (m >= 6 && m <= 8) return Season::kSummer;
    if (m >= 9 && m <= 11) return Season::kAutumn;
    return Season::kWinter;
}

std::string_view season_name(Season s) {
    switch (s) {
        case Season::kSpring: return "spring";
        case Season::kSummer: return "summer";
        case Season::kAutumn: return "autumn";
        case Season::kWinter: return "winter";
    }
    return "?";
}

bool is_weekend(Date d) {
    const std::chrono::weekday wd{d};
    return wd == std::chrono::Saturday || wd == std::chrono::Sunday;
}

Date first_working_day(YearMonth month, std::span<const Date> holidays) {
    Date d{month / std::chrono::day{1}};
    while (is_weekend(d) || std::find(holidays.begin(), holidays.end(), d) != holidays.end()) {
        d = add_days(d, 1);
    }
    return d;
}

// ---------------------------------------------------------------------------
// DailySeries

DailySeries::DailySeries(Date start, std::vector<double> values)
    : start_(start), values_(std::move(values)) {
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (std::isinf(values_[i])) {
            throw SpecError("daily series value on " + format_iso_date(date_at(i)) +
                            " is not finite");
        }
    }
}

DailySeries DailySeries::from_dates(std::span<const Date> dates, std::vector<double> values) {
    if (dates.size() != values.size()) {
        throw SpecError("daily series has " + std::to_string(dates.size()) + " dates but " +
                        std::to_string(values.size()) + " values");
    }
    for (std::size_t i = 1; i < dates.size(); ++i) {
        if (days_between(dates[i - 1], dates[i]) != 1) {
            throw SpecError("daily series dates are not consecutive at " +
                            format_iso_date(dates[i]));
        }
    }
    return DailySeries(dates.empty() ? Date{} : dates.front(), std::move(values));
}

bool DailySeries::contains(Date d) const { return index_of(d).has_value(); }

std::optional<std::size_t> DailySeries::index_of(Date d) const {
    const long off = days_between(start_, d);
    if (off < 0 || static_cast<std::size_t>(off) >= values_.size()) return std::nullopt;
    return static_cast<std::size_t>(off);
}

double DailySeries::at(Date d) const {
    const auto i = index_of(d);
    return i ? values_[*i] : kMissing;
}

bool DailySeries::is_complete() const { return missing_count() == 0; }

std::size_t DailySeries::missing_count() const {
    return static_cast<std::size_t>(std::count_if(values_.begin(), values_.end(), is_missing));
}

bool DailySeries::operator==(const DailySeries& other) const {
    if (start_ != other.start_ || values_.size() != other.values_.size()) return false;
    for (std::size_t i = 0; i < values_.size(); ++i) {
        const double a = values_[i];
        const double b = other.values_[i];
        if (is_missing(a) != is_missing(b)) return false;
        if (!is_missing(a) && a != b) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// MonthlyReleaseSeries

MonthlyReleaseSeries::MonthlyReleaseSeries(std::vector<YearMonth> months,
                                           std::vector<double> values,
                                           std::vector<Date> release_dates)
    : months_(std::move(months)), values_(std::move(values)),
      release_dates_(std::move(release_dates)) {
    if (months_.size() != values_.size() || months_.size() != release_dates_.size()) {
        throw SpecError("monthly series fields have mismatched lengths");
    }
    for (std::size_t i = 0; i < months_.size(); ++i) {
        if (!months_[i].ok()) throw SpecError("monthly series has an invalid month");
        if (!std::isfinite(values_[i])) {
            throw SpecError("monthly series value " + std::to_string(i) + " is not finite");
        }
        if (i > 0 && !(months_[i - 1] < months_[i])) {
            throw SpecError("monthly series months are not strictly increasing");
        }
        if (i > 0 && release_dates_[i - 1] >= release_dates_[i]) {
            throw SpecError("monthly series release dates are not strictly increasing at " +
                            format_iso_date(release_dates_[i]));
        }
        const Date month_end{months_[i] / std::chrono::last};
        if (release_dates_[i] <= month_end) {
            throw SpecError("release date " + format_iso_date(release_dates_[i]) +
                            " is not after the end of its reference month");
        }
    }
}

MonthlyReleaseSeries MonthlyReleaseSeries::with_first_working_day(
    std::vector<YearMonth> months, std::vector<double> values, std::span<const Date> holidays) {
    std::vector<Date> releases;
    releases.reserve(months.size());
    for (const auto& m : months) {
        releases.push_back(first_working_day(m + std::chrono::months{1}, holidays));
    }
    return MonthlyReleaseSeries(std::move(months), std::move(values), std::move(releases));
}

std::optional<std::size_t> MonthlyReleaseSeries::latest_released(Date d) const {
    const auto it = std::upper_bound(release_dates_.begin(), release_dates_.end(), d);
    if (it == release_dates_.begin()) return std::nullopt;
    return static_cast<std::size_t>(std::distance(release_dates_.begin(), it) - 1);
}

DailySeries align_monthly_to_daily(const MonthlyReleaseSeries& monthly, Date start,
                                   std::size_t n_days, int lag) {
    if (n_days == 0) throw AlignmentError("alignment calendar is empty");
    if (monthly.empty()) throw AlignmentError("monthly series is empty");
    if (lag < 1) throw AlignmentError("alignment lag must be >= 1");

    std::vector<double> out(n_days, kMissing);
    const auto releases = monthly.release_dates();
    const auto values = monthly.values();
    // Single forward sweep: `next` is the first release not yet in effect.
    std::size_t next = static_cast<std::size_t>(
        std::upper_bound(releases.begin(), releases.end(), start) - releases.begin());
    for (std::size_t i = 0; i < n_days; ++i) {
        const Date d = add_days(start, static_cast<long>(i));
        while (next < releases.size() && releases[next] <= d) ++next;
        if (next >= static_cast<std::size_t>(lag)) out[i] = values[next - lag];
    }
    return DailySeries(start, std::move(out));
}

DailySeries interpolate_weekends(const DailySeries& series) {
    const auto v = series.values();
    std::vector<std::size_t> observed;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!is_missing(v[i])) observed.push_back(i);
    }
    if (observed.size() == v.size()) return series;
    if (observed.size() < 2) {
        throw InterpolationError("interpolation needs at least two observed points");
    }
    if (observed.front() != 0) {
        throw InterpolationError("leading gap starting " + format_iso_date(series.start()) +
                                 " cannot be interpolated");
    }
    if (observed.back() != v.size() - 1) {
        throw InterpolationError("trailing gap ending " + format_iso_date(series.last()) +
                                 " cannot be interpolated");
    }
    std::vector<double> out(v.begin(), v.end());
    for (std::size_t n = 1; n < observed.size(); ++n) {
        const std::size_t lo = observed[n - 1];
        const std::size_t hi = observed[n];
        const double span = static_cast<double>(hi - lo);
        for (std::size_t i = lo + 1; i < hi; ++i) {
            const double w = static_cast<double>(i - lo) / span;
            out[i] = v[lo] + w * (v[hi] - v[lo]);
        }
    }
    return DailySeries(series.start(), std::move(out));
}

// ---------------------------------------------------------------------------
// Period index

PeriodScheme parse_period_scheme(std::string_view text) {
    if (text == "fixed_block" || text == "FixedBlock") return PeriodScheme::kFixedBlock;
    if (text == "calendar_day" || text == "CalendarDay") return PeriodScheme::kCalendarDay;
    throw SpecError("unknown period scheme '" + std::string(text) + "'");
}

std::string_view period_scheme_name(PeriodScheme s) {
    return s == PeriodScheme::kFixedBlock ? "fixed_block" : "calendar_day";
}

int period_index(Date date, int k, PeriodScheme scheme, std::span<const Date> release_dates) {
    if (scheme == PeriodScheme::kCalendarDay) {
        const auto day = static_cast<int>(static_cast<unsigned>(std::chrono::year_month_day{date}.day()));
        return std::min(day, k);
    }
    const auto it = std::lower_bound(release_dates.begin(), release_dates.end(), date);
    if (it == release_dates.begin()) return k;
    const long since = days_between(*std::prev(it), date);
    return static_cast<int>(std::min<long>(since, k));
}

PeriodIndex::PeriodIndex(int k, PeriodScheme scheme, std::vector<Date> release_dates)
    : k_(k), scheme_(scheme), release_dates_(std::move(release_dates)) {
    if (k_ < 2) throw SpecError("period count k must be >= 2");
    if (!std::is_sorted(release_dates_.begin(), release_dates_.end())) {
        throw SpecError("period index release dates must be sorted");
    }
}

}  // namespace rumidas
