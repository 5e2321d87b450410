#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "rumidas/forecast.hpp"
#include "rumidas/scoring.hpp"

namespace rumidas {

struct MonthlySource {
    std::string name;
    std::filesystem::path path;
};

struct DailySource {
    std::string name;
    std::filesystem::path path;
    bool interpolate = true;
};

/// Everything a forecast run needs. Paths are absolute after parsing.
struct RunConfig {
    std::filesystem::path target_path;
    std::vector<MonthlySource> monthly;
    std::vector<DailySource> daily;
    std::vector<Date> holidays;
    ForecastPlan plan;
    std::string benchmark;
    ScoreOptions scoring;
    std::filesystem::path output_dir;  // empty when neither config nor flags set it

    /// Canonical form: the manifest embeds it and its hash.
    nlohmann::json canonical() const;
};

/// Field-level problems, each prefixed with its locus (file and JSON path).
struct Diagnostics {
    std::vector<std::string> errors;

    void add(std::string msg) { errors.push_back(std::move(msg)); }
    bool ok() const { return errors.empty(); }
};

/// Parses a config (or a manifest wrapping one under "config"). Relative paths
/// resolve against `base_dir`. Problems are collected rather than thrown.
RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir,
                           const std::string& source, Diagnostics& diag);

/// Reads and parses `path`; throws ConfigError listing every problem.
RunConfig load_run_config(const std::filesystem::path& path);

/// Loads every referenced series (daily exogenous series interpolated when
/// configured).
SeriesBundle load_bundle(const RunConfig& cfg);

/// Coverage checks that need the data: monthly releases reaching the
/// evaluation range and full estimation windows.
void check_coverage(const RunConfig& cfg, const SeriesBundle& data, Diagnostics& diag);

ModelSpec parse_model_spec(const nlohmann::json& j, const std::string& locus, Diagnostics& diag);
nlohmann::json model_spec_json(const ModelSpec& spec);

DgpSpec parse_dgp_config(const nlohmann::json& j, Diagnostics& diag);

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace rumidas
