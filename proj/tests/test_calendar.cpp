#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "rumidas/calendar.hpp"
#include "rumidas/error.hpp"

using namespace rumidas;
using std::chrono::month;
using std::chrono::year;

namespace {

YearMonth ym(int y, unsigned m) { return YearMonth{year{y}, month{m}}; }

void check_matches(const DailySeries& got, const std::vector<double>& want) {
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
        if (std::isnan(want[i])) {
            CHECK_MESSAGE(is_missing(got[i]), "day " << i);
        } else {
            CHECK_MESSAGE(got[i] == want[i], "day " << i);
        }
    }
}

}  // namespace

TEST_CASE("ISO dates round-trip and reject malformed text") {
    const Date d = parse_iso_date("2019-01-02");
    CHECK(d == make_date(2019, 1, 2));
    CHECK(format_iso_date(d) == "2019-01-02");
    CHECK_THROWS_AS(parse_iso_date("2019-02-30"), IoError);
    CHECK_THROWS_AS(parse_iso_date("2019-1-2"), IoError);
    CHECK_THROWS_AS(parse_iso_date("yesterday"), IoError);
}

TEST_CASE("meteorological seasons") {
    CHECK(season_of(make_date(2020, 3, 1)) == Season::kSpring);
    CHECK(season_of(make_date(2020, 5, 31)) == Season::kSpring);
    CHECK(season_of(make_date(2020, 6, 1)) == Season::kSummer);
    CHECK(season_of(make_date(2020, 9, 15)) == Season::kAutumn);
    CHECK(season_of(make_date(2020, 12, 1)) == Season::kWinter);
    CHECK(season_of(make_date(2021, 2, 28)) == Season::kWinter);
}

TEST_CASE("first working day skips weekends and listed holidays") {
    // 2019-06-01 is a Saturday.
    CHECK(first_working_day(ym(2019, 6)) == make_date(2019, 6, 3));
    const std::vector<Date> holidays{make_date(2019, 1, 1)};
    CHECK(first_working_day(ym(2019, 1)) == make_date(2019, 1, 1));
    CHECK(first_working_day(ym(2019, 1), holidays) == make_date(2019, 1, 2));
}

TEST_CASE("DailySeries invariants") {
    CHECK_THROWS_AS(DailySeries(make_date(2020, 1, 1), {1.0, std::numeric_limits<double>::infinity()}), SpecError);
    const std::vector<Date> gap{make_date(2020, 1, 1), make_date(2020, 1, 3)};
    CHECK_THROWS_AS(DailySeries::from_dates(gap, {1.0, 2.0}), SpecError);
    const DailySeries s(make_date(2020, 1, 1), {1.0, kMissing, 3.0});
    CHECK(s.last() == make_date(2020, 1, 3));
    CHECK(s.missing_count() == 1);
    CHECK(is_missing(s.at(make_date(2019, 12, 31))));
    CHECK(s.at(make_date(2020, 1, 3)) == 3.0);
}

TEST_CASE("MonthlyReleaseSeries rejects releases inside their own month") {
    CHECK_THROWS_AS(MonthlyReleaseSeries({ym(2020, 1)}, {1.0}, {make_date(2020, 1, 31)}), SpecError);
    CHECK_NOTHROW(MonthlyReleaseSeries({ym(2020, 1)}, {1.0}, {make_date(2020, 2, 1)}));
    CHECK_THROWS_AS(MonthlyReleaseSeries({ym(2020, 2), ym(2020, 1)}, {1.0, 2.0},
                                         {make_date(2020, 3, 2), make_date(2020, 3, 3)}),
                    SpecError);
}

TEST_CASE("December value released on the 2nd of January becomes usable that day") {
    const std::vector<Date> holidays{make_date(2019, 1, 1)};
    const auto m = MonthlyReleaseSeries::with_first_working_day({ym(2018, 11), ym(2018, 12)}, {101.0, 102.0},
                                                                holidays);
    CHECK(m.release_dates()[1] == make_date(2019, 1, 2));
    const auto daily = align_monthly_to_daily(m, make_date(2019, 1, 1), 5);
    CHECK(daily[0] == 101.0);
    for (std::size_t i = 1; i < 5; ++i) CHECK(daily[i] == 102.0);
}

TEST_CASE("calendar entirely before the only release is all missing") {
    const MonthlyReleaseSeries m({ym(2020, 5)}, {3.0}, {make_date(2020, 6, 1)});
    const auto daily = align_monthly_to_daily(m, make_date(2020, 5, 1), 31);
    CHECK(daily.missing_count() == 31);
}

TEST_CASE("step function changes exactly at the release days") {
    const Date start = make_date(2020, 1, 1);
    const std::vector<Date> releases{add_days(start, 31), add_days(start, 59)};
    const MonthlyReleaseSeries m({ym(2019, 12), ym(2020, 1)}, {7.0, 9.0}, releases);
    const auto daily = align_monthly_to_daily(m, start, 90);
    check_matches(daily, oracle::scan_releases(releases, {7.0, 9.0}, start, 90));
    CHECK(is_missing(daily[30]));
    CHECK(daily[31] == 7.0);
    CHECK(daily[58] == 7.0);
    CHECK(daily[59] == 9.0);
    CHECK(daily[89] == 9.0);
}

TEST_CASE("alignment agrees with a day-by-day scan on random release calendars") {
    std::mt19937_64 rng(42);
    for (int rep = 0; rep < 50; ++rep) {
        std::uniform_int_distribution<int> delay(1, 20);
        std::uniform_int_distribution<int> offset(-40, 40);
        std::normal_distribution<double> val(0.0, 5.0);
        std::vector<YearMonth> months;
        std::vector<double> values;
        std::vector<Date> releases;
        YearMonth cur = ym(2015, 1);
        for (int i = 0; i < 12; ++i) {
            const Date month_end = Date{(cur + std::chrono::months{1}) / 1} - std::chrono::days{1};
            Date rel = add_days(month_end, delay(rng));
            if (!releases.empty() && rel <= releases.back()) rel = add_days(releases.back(), 1);
            months.push_back(cur);
            values.push_back(val(rng));
            releases.push_back(rel);
            cur = cur + std::chrono::months{1};
        }
        const MonthlyReleaseSeries m(months, values, releases);
        const Date start = add_days(make_date(2015, 2, 1), offset(rng));
        for (int lag : {1, 2}) {
            const auto daily = align_monthly_to_daily(m, start, 400, lag);
            check_matches(daily, oracle::scan_releases(releases, values, start, 400, lag));
        }
    }
}

TEST_CASE("alignment errors") {
    const MonthlyReleaseSeries m({ym(2020, 1)}, {1.0}, {make_date(2020, 2, 3)});
    CHECK_THROWS_AS(align_monthly_to_daily(m, make_date(2020, 1, 1), 0), AlignmentError);
    CHECK_THROWS_AS(align_monthly_to_daily(MonthlyReleaseSeries{}, make_date(2020, 1, 1), 10), AlignmentError);
}

TEST_CASE("weekend gap between Friday and Monday is filled linearly") {
    // 2020-01-03 is a Friday.
    const DailySeries s(make_date(2020, 1, 3), {100.0, kMissing, kMissing, 106.0});
    const auto f = interpolate_weekends(s);
    CHECK(f[0] == 100.0);
    CHECK(f[1] == doctest::Approx(102.0).epsilon(1e-14));
    CHECK(f[2] == doctest::Approx(104.0).epsilon(1e-14));
    CHECK(f[3] == 106.0);
}

TEST_CASE("interpolation without gaps is the identity and is idempotent") {
    const DailySeries full(make_date(2020, 1, 1), {1.0, 2.0, 5.0, -3.0});
    CHECK(interpolate_weekends(full) == full);
    const DailySeries gappy(make_date(2020, 1, 1), {1.0, kMissing, 5.0, kMissing, kMissing, -3.0});
    const auto once = interpolate_weekends(gappy);
    CHECK(interpolate_weekends(once) == once);
}

TEST_CASE("interpolation matches a piecewise-linear oracle on random gaps") {
    std::mt19937_64 rng(7);
    std::bernoulli_distribution gap(0.35);
    std::normal_distribution<double> z;
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> v(60);
        for (auto& x : v) x = gap(rng) ? oracle::kNaN : z(rng);
        v.front() = z(rng);
        v.back() = z(rng);
        const auto f = interpolate_weekends(DailySeries(make_date(2021, 3, 1), v));
        for (std::size_t t = 0; t < v.size(); ++t) {
            CHECK(f[t] == doctest::Approx(oracle::piecewise_linear(v, t)).epsilon(1e-12));
        }
    }
}

TEST_CASE("interpolation refuses to extrapolate") {
    CHECK_THROWS_AS(interpolate_weekends(DailySeries(make_date(2020, 1, 1), {kMissing, 1.0, 2.0})),
                    InterpolationError);
    CHECK_THROWS_AS(interpolate_weekends(DailySeries(make_date(2020, 1, 1), {1.0, 2.0, kMissing})),
                    InterpolationError);
    CHECK_THROWS_AS(interpolate_weekends(DailySeries(make_date(2020, 1, 1), {1.0, kMissing})),
                    InterpolationError);
}

TEST_CASE("period index under both schemes") {
    const std::vector<Date> releases{make_date(2020, 2, 3), make_date(2020, 3, 2)};
    for (int k : {2, 7, 28}) {
        CHECK(period_index(make_date(2020, 2, 4), k, PeriodScheme::kFixedBlock, releases) == 1);
        CHECK(period_index(make_date(2020, 3, 3), k, PeriodScheme::kFixedBlock, releases) == 1);
    }
    // 29 days after the March release.
    CHECK(period_index(add_days(make_date(2020, 3, 2), 29), 28, PeriodScheme::kFixedBlock, releases) == 28);
    CHECK(period_index(make_date(2020, 7, 15), 28, PeriodScheme::kCalendarDay, {}) == 15);
    CHECK(period_index(make_date(2020, 7, 31), 28, PeriodScheme::kCalendarDay, {}) == 28);
    CHECK(period_index(make_date(2020, 1, 10), 28, PeriodScheme::kFixedBlock, releases) == 28);
    CHECK_THROWS_AS(PeriodIndex(1, PeriodScheme::kFixedBlock), SpecError);
}

TEST_CASE("fixed-block periods run 1, 2, ... from each release, clamped at k") {
    const auto m = fixture::monthly(ym(2018, 12), 24, [](std::size_t) { return 0.0; });
    const std::vector<Date> rel(m.release_dates().begin(), m.release_dates().end());
    const int k = 28;
    const PeriodIndex idx(k, PeriodScheme::kFixedBlock, rel);
    for (Date d = add_days(rel.front(), 1); d <= rel.back(); d = add_days(d, 1)) {
        const auto last = *std::prev(std::lower_bound(rel.begin(), rel.end(), d));
        CHECK(idx.index_of(d) == std::min<long>(days_between(last, d), k));
    }
}
