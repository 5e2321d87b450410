#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "rumidas/config.hpp"

namespace rumidas {

inline constexpr const char* kToolVersion = "1.0.0";

enum ExitCode : int { kExitOk = 0, kExitInvalid = 1, kExitRuntime = 2 };

/// Command-line values that take precedence over the config file.
struct Overrides {
    std::optional<std::filesystem::path> output{};
    std::optional<int> jobs{};
    std::optional<std::uint64_t> seed{};
};

/// Output directory: flag, then config, then $RUMIDAS_OUTPUT_DIR, then "rumidas_out".
std::filesystem::path resolve_output_dir(const std::optional<std::filesystem::path>& flag,
                                         const std::filesystem::path& configured);

int cmd_validate(const std::filesystem::path& config, std::ostream& out, std::ostream& err);

/// Writes forecasts.csv, components/, errors.csv, scores.{csv,md,jsonl},
/// mcs.csv, manifest.json (and audit.json when auditing) to the output dir.
int cmd_forecast(const std::filesystem::path& config, const Overrides& overrides, std::ostream& out,
                 std::ostream& err);

/// Writes target.csv, macro.csv and oil.csv.
int cmd_simulate(const std::filesystem::path& dgp_config, const Overrides& overrides, std::ostream& out,
                 std::ostream& err);

struct ScoreRequest {
    std::filesystem::path forecasts;  // forecasts.csv from a previous run
    std::optional<std::filesystem::path> config;  // config or manifest supplying scoring settings
    std::string benchmark;  // overrides the config's benchmark
    std::optional<double> alpha;
    std::optional<int> n_boot;
};

/// Re-scores an existing forecast dump.
int cmd_score(const ScoreRequest& request, const Overrides& overrides, std::ostream& out, std::ostream& err);

}  // namespace rumidas
