#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "rumidas/calendar.hpp"
#include "rumidas/design.hpp"

namespace fixture {

using rumidas::Date;

inline std::vector<double> ar1_path(std::size_t n, double phi, double sigma, std::uint64_t seed,
                                    double mean = 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    std::vector<double> x(n);
    double prev = 0.0;
    for (std::size_t burn = 0; burn < 200; ++burn) prev = phi * prev + sigma * z(rng);
    for (auto& v : x) {
        prev = phi * prev + sigma * z(rng);
        v = mean + prev;
    }
    return x;
}

/// `n` consecutive months from `first`, released on the first weekday of the
/// following month, with values from `value(i)`.
template <typename Fn>
rumidas::MonthlyReleaseSeries monthly(rumidas::YearMonth first, std::size_t n, Fn value) {
    std::vector<rumidas::YearMonth> months;
    std::vector<double> values;
    for (std::size_t i = 0; i < n; ++i) {
        months.push_back(first + std::chrono::months{static_cast<int>(i)});
        values.push_back(value(i));
    }
    return rumidas::MonthlyReleaseSeries::with_first_working_day(std::move(months), std::move(values));
}

/// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("rumidas_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace fixture
