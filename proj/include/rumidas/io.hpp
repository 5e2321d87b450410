#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rumidas/calendar.hpp"
#include "rumidas/record.hpp"

namespace rumidas {

using CsvRow = std::vector<std::string>;

/// Comma-separated rows without quoting; blank lines are skipped and a
/// trailing '\r' is stripped.
std::vector<CsvRow> read_csv(std::istream& in);
std::string join_csv_row(const CsvRow& row);

/// `date,value` with ISO dates in increasing order. Absent dates and empty
/// values become `kMissing`.
DailySeries read_daily_csv(std::istream& in, const std::string& source = "daily CSV");
DailySeries read_daily_csv(const std::filesystem::path& path);
/// Missing values are omitted unless `keep_missing` writes them as empty cells.
void write_daily_csv(const DailySeries& series, std::ostream& out, bool keep_missing = false);

/// `year,month,value[,release_date]`. Without a release column each month is
/// released on the first working day of the following month.
MonthlyReleaseSeries read_monthly_csv(std::istream& in, std::span<const Date> holidays = {},
                                      const std::string& source = "monthly CSV");
MonthlyReleaseSeries read_monthly_csv(const std::filesystem::path& path,
                                      std::span<const Date> holidays = {});
void write_monthly_csv(const MonthlyReleaseSeries& series, std::ostream& out);

/// Forecast table `model,origin,target,horizon,mean,realized,components_file`.
/// `components_file(record)` names the file holding that record's mixture.
void write_forecast_csv(std::span<const ForecastRecord> records, std::ostream& out,
                        const std::map<std::pair<std::string, int>, std::string>& components_files);

struct ForecastRow {
    ForecastRecord record;  // predictive left empty
    std::string components_file;
};
std::vector<ForecastRow> read_forecast_csv(std::istream& in);

/// Binary mixture dump: magic, record count, then per record the origin (days
/// since 1970-01-01), component count, means and variances as little-endian
/// doubles.
void write_components(const std::filesystem::path& path, std::span<const ForecastRecord* const> records);
std::map<Date, PredictiveDensity> read_components(const std::filesystem::path& path);

}  // namespace rumidas
