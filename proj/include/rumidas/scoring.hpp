#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rumidas/bayes.hpp"
#include "rumidas/record.hpp"

namespace rumidas {

// ---------------------------------------------------------------------------
// Point and density scores

double rmse(std::span<const ForecastRecord> records);

/// CRPS of N(mu, sigma^2) at y. sigma = 0 gives |y - mu|.
double crps_gaussian(double mu, double sigma, double y);

/// Exact CRPS of an equal-weight Gaussian mixture via the pairwise closed form.
double crps_mixture(const PredictiveDensity& pred, double realized);

/// Log of the mixture density at `realized` (log-sum-exp over components).
double log_predictive_score(const PredictiveDensity& pred, double realized);

// ---------------------------------------------------------------------------
// Tests

struct LossSeries {
    std::vector<Date> dates;
    std::vector<double> losses;

    std::size_t size() const { return losses.size(); }
    double mean() const;
};

enum class Sided { kOne, kTwo };

struct DmOptions {
    /// Harvey-Leybourne-Newbold small-sample correction with Student-t p-values.
    bool small_sample_correction = false;
};

struct DmResult {
    double statistic = 0.0;
    double p_one_sided = 0.5;  // H1: the second series has lower expected loss
    double p_two_sided = 1.0;

    double pvalue(Sided s) const { return s == Sided::kOne ? p_one_sided : p_two_sided; }
};

/// Diebold-Mariano test on d = loss_null - loss_alt with a Bartlett long-run
/// variance truncated at lag h-1. A positive statistic favours `loss_alt`.
DmResult diebold_mariano(const LossSeries& loss_null, const LossSeries& loss_alt, int h,
                         DmOptions options = {});

/// "***", "**", "*" at 1/5/10 %.
std::string significance_stars(double p);

struct BootstrapConfig {
    int block_length = 0;  // 0 selects max(h, ceil(T^(1/3)))
    int n_boot = 5000;
    std::uint64_t seed = 0;
};

struct McsResult {
    std::vector<std::string> included;
    /// Elimination order with the MCS p-value at which each model left.
    std::vector<std::pair<std::string, double>> eliminated;
    int block_length = 0;

    bool contains(const std::string& model) const;
};

/// Model Confidence Set with the T_max statistic and a moving-block bootstrap.
McsResult model_confidence_set(const std::vector<std::pair<std::string, LossSeries>>& losses,
                               double alpha, const BootstrapConfig& bootstrap, int h = 1);

// ---------------------------------------------------------------------------
// Report

enum class Metric { kSquaredError = 0, kCrps = 1, kLogScore = 2 };
inline constexpr std::array<Metric, 3> kAllMetrics{Metric::kSquaredError, Metric::kCrps,
                                                   Metric::kLogScore};
std::string_view metric_name(Metric m);

/// Per-record loss: squared error, CRPS, or negative log score.
double record_loss(const ForecastRecord& r, Metric m);

struct ScoreCell {
    std::string model;
    int horizon = 0;
    std::size_t n = 0;
    bool benchmark = false;
    double rmse = 0.0;
    double crps = 0.0;
    double logscore = 0.0;
    // Relative to the benchmark: RMSE and CRPS ratios, log-score difference.
    double rmse_ratio = 1.0;
    double crps_ratio = 1.0;
    double logscore_diff = 0.0;
    std::array<double, 3> dm_stat{0.0, 0.0, 0.0};
    std::array<double, 3> dm_p_one{0.5, 0.5, 0.5};
    std::array<double, 3> dm_p_two{1.0, 1.0, 1.0};
    std::array<bool, 3> in_mcs{true, true, true};

    bool operator==(const ScoreCell&) const = default;
};

struct ScoreOptions {
    double alpha = 0.10;
    BootstrapConfig bootstrap{};
    DmOptions dm{};
};

struct ScoreTable {
    std::string benchmark;
    double alpha = 0.10;
    std::vector<ScoreCell> cells;  // ordered by horizon, then model order of first appearance

    const ScoreCell& cell(const std::string& model, int horizon) const;
    std::vector<int> horizons() const;
    std::vector<std::string> models() const;

    bool operator==(const ScoreTable&) const = default;
};

ScoreTable build_score_table(std::span<const ForecastRecord> records,
                             const std::string& benchmark_id, const ScoreOptions& options = {});

void write_score_csv(const ScoreTable& table, std::ostream& out);
ScoreTable read_score_csv(std::istream& in);
void write_score_markdown(const ScoreTable& table, std::ostream& out);
void write_score_jsonl(const ScoreTable& table, std::ostream& out);
void write_mcs_report(const ScoreTable& table, std::ostream& out);

}  // namespace rumidas
