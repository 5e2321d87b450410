#include "rumidas/io.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "rumidas/error.hpp"
#include "rumidas/format.hpp"

namespace rumidas {

bool parse_double(std::string_view text, double& out) {
    if (text.empty()) {
        out = kMissing;
        return true;
    }
    if (text == "inf" || text == "+inf") {
        out = std::numeric_limits<double>::infinity();
        return true;
    }
    if (text == "-inf") {
        out = -std::numeric_limits<double>::infinity();
        return true;
    }
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

std::vector<CsvRow> read_csv(std::istream& in) {
    std::vector<CsvRow> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        CsvRow row;
        std::size_t pos = 0;
        while (true) {
            const auto comma = line.find(',', pos);
            std::string field = line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            const auto b = field.find_first_not_of(" \t");
            const auto e = field.find_last_not_of(" \t");
            row.push_back(b == std::string::npos ? std::string{} : field.substr(b, e - b + 1));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string join_csv_row(const CsvRow& row) {
    std::string out;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out += ',';
        out += row[i];
    }
    return out;
}

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    return in;
}

std::string locus(const std::string& source, std::size_t line) {
    return source + ":" + std::to_string(line + 1);
}

}  // namespace

DailySeries read_daily_csv(std::istream& in, const std::string& source) {
    const auto rows = read_csv(in);
    if (rows.empty() || rows.front().size() < 2 || rows.front()[0] != "date" || rows.front()[1] != "value") {
        throw IoError(source + ": expected header 'date,value'");
    }
    std::vector<std::pair<Date, double>> obs;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& f = rows[r];
        if (f.size() < 2) throw IoError(locus(source, r) + ": expected 2 fields");
        Date d;
        try {
            d = parse_iso_date(f[0]);
        } catch (const IoError& e) {
            throw IoError(locus(source, r) + ": " + e.what());
        }
        double v = 0.0;
        if (!parse_double(f[1], v) || std::isinf(v)) {
            throw IoError(locus(source, r) + ": value '" + f[1] + "' is not a finite number");
        }
        if (!obs.empty() && d <= obs.back().first) {
            throw IoError(locus(source, r) + ": dates must be strictly increasing");
        }
        obs.emplace_back(d, v);
    }
    if (obs.empty()) throw IoError(source + ": no observations");
    const Date start = obs.front().first;
    std::vector<double> values(static_cast<std::size_t>(days_between(start, obs.back().first) + 1), kMissing);
    for (const auto& [d, v] : obs) values[static_cast<std::size_t>(days_between(start, d))] = v;
    return DailySeries(start, std::move(values));
}

DailySeries read_daily_csv(const std::filesystem::path& path) {
    auto in = open_input(path);
    return read_daily_csv(in, path.string());
}

void write_daily_csv(const DailySeries& series, std::ostream& out, bool keep_missing) {
    out << "date,value\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (is_missing(series[i]) && !keep_missing) continue;
        out << format_iso_date(series.date_at(i)) << ',' << format_double(series[i]) << '\n';
    }
}

MonthlyReleaseSeries read_monthly_csv(std::istream& in, std::span<const Date> holidays,
                                      const std::string& source) {
    const auto rows = read_csv(in);
    if (rows.empty() || rows.front().size() < 3 || rows.front()[0] != "year" ||
        rows.front()[1] != "month" || rows.front()[2] != "value") {
        throw IoError(source + ": expected header 'year,month,value[,release_date]'");
    }
    const bool has_release = rows.front().size() >= 4 && rows.front()[3] == "release_date";
    std::vector<YearMonth> months;
    std::vector<double> values;
    std::vector<Date> releases;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& f = rows[r];
        if (f.size() < 3) throw IoError(locus(source, r) + ": expected at least 3 fields");
        double y = 0.0;
        double m = 0.0;
        double v = 0.0;
        if (!parse_double(f[0], y) || !parse_double(f[1], m) || std::isnan(y) || std::isnan(m) ||
            m < 1 || m > 12 || y != std::floor(y) || m != std::floor(m)) {
            throw IoError(locus(source, r) + ": invalid year/month");
        }
        if (!parse_double(f[2], v) || !std::isfinite(v)) {
            throw IoError(locus(source, r) + ": value '" + f[2] + "' is not a finite number");
        }
        const YearMonth ym{std::chrono::year{static_cast<int>(y)},
                           std::chrono::month{static_cast<unsigned>(m)}};
        months.push_back(ym);
        values.push_back(v);
        if (has_release && f.size() >= 4 && !f[3].empty()) {
            try {
                releases.push_back(parse_iso_date(f[3]));
            } catch (const IoError& e) {
                throw IoError(locus(source, r) + ": " + e.what());
            }
        } else {
            releases.push_back(first_working_day(ym + std::chrono::months{1}, holidays));
        }
    }
    try {
        return MonthlyReleaseSeries(std::move(months), std::move(values), std::move(releases));
    } catch (const SpecError& e) {
        throw IoError(source + ": " + e.what());
    }
}

MonthlyReleaseSeries read_monthly_csv(const std::filesystem::path& path, std::span<const Date> holidays) {
    auto in = open_input(path);
    return read_monthly_csv(in, holidays, path.string());
}

void write_monthly_csv(const MonthlyReleaseSeries& series, std::ostream& out) {
    out << "year,month,value,release_date\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto ym = series.months()[i];
        out << static_cast<int>(ym.year()) << ',' << static_cast<unsigned>(ym.month()) << ','
            << format_double(series.values()[i]) << ',' << format_iso_date(series.release_dates()[i])
            << '\n';
    }
}

void write_forecast_csv(std::span<const ForecastRecord> records, std::ostream& out,
                        const std::map<std::pair<std::string, int>, std::string>& components_files) {
    out << "model,origin,target,horizon,mean,realized,components_file\n";
    for (const auto& r : records) {
        std::string comp;
        if (r.ok()) {
            const auto it = components_files.find({r.model, r.horizon});
            if (it != components_files.end()) comp = it->second;
        }
        out << r.model << ',' << format_iso_date(r.origin) << ',' << format_iso_date(r.target) << ','
            << r.horizon << ',' << (r.ok() ? format_double(r.mean) : std::string{}) << ','
            << format_double(r.realized) << ',' << comp << '\n';
    }
}

std::vector<ForecastRow> read_forecast_csv(std::istream& in) {
    const auto rows = read_csv(in);
    if (rows.empty() || join_csv_row(rows.front()) != "model,origin,target,horizon,mean,realized,components_file") {
        throw IoError("forecast CSV has an unexpected header");
    }
    std::vector<ForecastRow> out;
    out.reserve(rows.size() - 1);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& f = rows[r];
        if (f.size() != 7) throw IoError("forecast CSV row " + std::to_string(r) + " has wrong arity");
        ForecastRow row;
        row.record.model = f[0];
        row.record.origin = parse_iso_date(f[1]);
        row.record.target = parse_iso_date(f[2]);
        double h = 0.0;
        if (!parse_double(f[3], h) || !(h >= 1)) throw IoError("forecast CSV row " + std::to_string(r) + ": bad horizon");
        row.record.horizon = static_cast<int>(h);
        if (!parse_double(f[4], row.record.mean) || !parse_double(f[5], row.record.realized)) {
            throw IoError("forecast CSV row " + std::to_string(r) + ": bad number");
        }
        if (is_missing(row.record.mean)) row.record.error = "no forecast";
        row.components_file = f[6];
        out.push_back(std::move(row));
    }
    return out;
}

namespace {

constexpr char kMagic[8] = {'R', 'M', 'D', 'C', 'O', 'M', 'P', '1'};

template <typename T>
void put(std::ostream& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.write(buf, sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::filesystem::path& path) {
    char buf[sizeof(T)];
    if (!in.read(buf, sizeof(T))) throw IoError("'" + path.string() + "' is truncated");
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

}  // namespace

void write_components(const std::filesystem::path& path, std::span<const ForecastRecord* const> records) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out.write(kMagic, sizeof kMagic);
    put<std::uint64_t>(out, records.size());
    for (const auto* r : records) {
        put<std::int64_t>(out, r->origin.time_since_epoch().count());
        put<std::uint32_t>(out, static_cast<std::uint32_t>(r->predictive.size()));
        for (double m : r->predictive.means()) put<double>(out, m);
        for (double v : r->predictive.variances()) put<double>(out, v);
    }
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::map<Date, PredictiveDensity> read_components(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    char magic[8];
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
        throw IoError("'" + path.string() + "' is not a components file");
    }
    const auto n = get<std::uint64_t>(in, path);
    std::map<Date, PredictiveDensity> out;
    for (std::uint64_t i = 0; i < n; ++i) {
        const Date origin{std::chrono::days{get<std::int64_t>(in, path)}};
        const auto s = get<std::uint32_t>(in, path);
        std::vector<double> m(s);
        std::vector<double> v(s);
        for (auto& x : m) x = get<double>(in, path);
        for (auto& x : v) x = get<double>(in, path);
        out.emplace(origin, PredictiveDensity(std::move(m), std::move(v)));
    }
    return out;
}

}  // namespace rumidas
