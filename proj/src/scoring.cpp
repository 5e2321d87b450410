#include "rumidas/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include "rumidas/error.hpp"
#include "rumidas/format.hpp"
#include "rumidas/io.hpp"

namespace rumidas {

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.70710678118654752440); }
double std_normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

// E|X| for X ~ N(mu, sigma^2).
double abs_moment(double mu, double var) {
    if (var <= 0.0) return std::abs(mu);
    const double sd = std::sqrt(var);
    const double z = mu / sd;
    return mu * (2.0 * std_normal_cdf(z) - 1.0) + 2.0 * sd * std_normal_pdf(z);
}

void check_components(const PredictiveDensity& pred) {
    if (pred.size() == 0) throw ScoreError("predictive density has no components");
    for (double v : pred.variances()) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw ScoreError("predictive component variance must be positive and finite");
        }
    }
}

}  // namespace

double rmse(std::span<const ForecastRecord> records) {
    double acc = 0.0;
    std::size_t n = 0;
    for (const auto& r : records) {
        if (!r.ok() || is_missing(r.realized)) continue;
        const double e = r.mean - r.realized;
        acc += e * e;
        ++n;
    }
    if (n == 0) throw ScoreError("rmse: no record has a realized value");
    return std::sqrt(acc / static_cast<double>(n));
}

double crps_gaussian(double mu, double sigma, double y) {
    if (sigma < 0.0) throw ScoreError("crps_gaussian: negative sigma");
    if (sigma == 0.0) return std::abs(y - mu);
    const double z = (y - mu) / sigma;
    return sigma * (z * (2.0 * std_normal_cdf(z) - 1.0) + 2.0 * std_normal_pdf(z) -
                    1.0 / std::sqrt(M_PI));
}

double crps_mixture(const PredictiveDensity& pred, double realized) {
    check_components(pred);
    const auto& mu = pred.means();
    const auto& var = pred.variances();
    const std::size_t S = mu.size();
    double first = 0.0;
    for (std::size_t s = 0; s < S; ++s) first += abs_moment(realized - mu[s], var[s]);
    first /= static_cast<double>(S);

    double pair = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
        pair += 0.5 * abs_moment(0.0, 2.0 * var[s]);
        for (std::size_t t = s + 1; t < S; ++t) pair += abs_moment(mu[s] - mu[t], var[s] + var[t]);
    }
    // Sum over ordered pairs is twice the upper triangle plus the diagonal.
    pair = 2.0 * pair / (static_cast<double>(S) * static_cast<double>(S));
    return first - 0.5 * pair;
}

double log_predictive_score(const PredictiveDensity& pred, double realized) {
    if (pred.size() == 0) throw ScoreError("predictive density has no components");
    const auto& mu = pred.means();
    const auto& var = pred.variances();
    std::vector<double> logs(mu.size());
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < mu.size(); ++s) {
        if (var[s] > 0.0) {
            const double z = (realized - mu[s]) / std::sqrt(var[s]);
            logs[s] = -kLogSqrt2Pi - 0.5 * std::log(var[s]) - 0.5 * z * z;
        } else {
            logs[s] = realized == mu[s] ? std::numeric_limits<double>::infinity()
                                        : -std::numeric_limits<double>::infinity();
        }
        top = std::max(top, logs[s]);
    }
    if (!std::isfinite(top)) return top;
    double acc = 0.0;
    for (double l : logs) acc += std::exp(l - top);
    return top + std::log(acc / static_cast<double>(mu.size()));
}

// ---------------------------------------------------------------------------

double LossSeries::mean() const {
    if (losses.empty()) return std::numeric_limits<double>::quiet_NaN();
    return std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(losses.size());
}

DmResult diebold_mariano(const LossSeries& loss_null, const LossSeries& loss_alt, int h,
                         DmOptions options) {
    if (h < 1) throw ScoreError("Diebold-Mariano horizon must be >= 1");
    if (loss_null.size() != loss_alt.size() || loss_null.dates != loss_alt.dates) {
        throw ScoreError("Diebold-Mariano loss series are not aligned");
    }
    const std::size_t T = loss_null.size();
    if (T < 10) throw ScoreError("Diebold-Mariano needs at least 10 paired losses");
    for (std::size_t t = 0; t < T; ++t) {
        if (!std::isfinite(loss_null.losses[t]) || !std::isfinite(loss_alt.losses[t])) {
            throw ScoreError("Diebold-Mariano losses must be finite");
        }
    }
    const double Td = static_cast<double>(T);
    std::vector<double> d(T);
    for (std::size_t t = 0; t < T; ++t) d[t] = loss_null.losses[t] - loss_alt.losses[t];
    const double dbar = std::accumulate(d.begin(), d.end(), 0.0) / Td;

    auto autocov = [&](std::size_t lag) {
        double acc = 0.0;
        for (std::size_t t = lag; t < T; ++t) acc += (d[t] - dbar) * (d[t - lag] - dbar);
        return acc / Td;
    };
    double lrv = autocov(0);
    for (int j = 1; j < h && static_cast<std::size_t>(j) < T; ++j) {
        lrv += 2.0 * (1.0 - static_cast<double>(j) / static_cast<double>(h)) *
               autocov(static_cast<std::size_t>(j));
    }
    double msq = 0.0;
    for (double v : d) msq += v * v;
    msq /= Td;

    DmResult out;
    if (msq == 0.0) return out;  // identical losses
    if (!(lrv > 1e-20 * msq)) {
        if (dbar == 0.0) return out;
        out.statistic = dbar > 0.0 ? std::numeric_limits<double>::infinity()
                                   : -std::numeric_limits<double>::infinity();
        out.p_one_sided = dbar > 0.0 ? 0.0 : 1.0;
        out.p_two_sided = 0.0;
        return out;
    }
    out.statistic = dbar / std::sqrt(lrv / Td);
    if (options.small_sample_correction) {
        const double hd = static_cast<double>(h);
        const double adj = (Td + 1.0 - 2.0 * hd + hd * (hd - 1.0) / Td) / Td;
        out.statistic *= std::sqrt(std::max(adj, 0.0));
        const boost::math::students_t dist(Td - 1.0);
        out.p_one_sided = boost::math::cdf(boost::math::complement(dist, out.statistic));
        out.p_two_sided =
            2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(out.statistic)));
    } else {
        out.p_one_sided = std_normal_cdf(-out.statistic);
        out.p_two_sided = 2.0 * std_normal_cdf(-std::abs(out.statistic));
    }
    out.p_two_sided = std::min(out.p_two_sided, 1.0);
    return out;
}

std::string significance_stars(double p) {
    if (p < 0.01) return "***";
    if (p < 0.05) return "**";
    if (p < 0.10) return "*";
    return "";
}

// ---------------------------------------------------------------------------
// Model Confidence Set

bool McsResult::contains(const std::string& model) const {
    return std::find(included.begin(), included.end(), model) != included.end();
}

McsResult model_confidence_set(const std::vector<std::pair<std::string, LossSeries>>& losses,
                               double alpha, const BootstrapConfig& bootstrap, int h) {
    if (losses.size() < 2) throw ScoreError("model confidence set needs at least two models");
    if (bootstrap.n_boot < 100) throw ConfigError("MCS n_boot must be >= 100");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("MCS alpha must be in (0, 1)");
    const std::size_t m = losses.size();
    const std::size_t T = losses.front().second.size();
    if (T < 2) throw ScoreError("model confidence set needs at least two loss observations");
    for (const auto& [name, ls] : losses) {
        if (ls.size() != T || ls.dates != losses.front().second.dates) {
            throw ScoreError("MCS loss series for '" + name + "' is not aligned");
        }
    }

    McsResult out;
    const int block = bootstrap.block_length > 0
                          ? bootstrap.block_length
                          : std::max(h, static_cast<int>(std::ceil(std::cbrt(static_cast<double>(T)))));
    out.block_length = std::min<int>(block, static_cast<int>(T));
    const std::size_t L = static_cast<std::size_t>(out.block_length);

    // Prefix sums let a resampled mean be assembled block by block.
    std::vector<std::vector<double>> prefix(m, std::vector<double>(T + 1, 0.0));
    std::vector<double> mean(m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto& l = losses[i].second.losses;
        for (std::size_t t = 0; t < T; ++t) prefix[i][t + 1] = prefix[i][t] + l[t];
        mean[i] = prefix[i][T] / static_cast<double>(T);
    }

    // Bootstrap means of every model under shared resampled indices.
    const std::size_t B = static_cast<std::size_t>(bootstrap.n_boot);
    std::vector<double> boot(B * m);
    const std::size_t n_blocks = (T + L - 1) / L;
    for (std::size_t b = 0; b < B; ++b) {
        std::mt19937_64 rng(derive_seed(bootstrap.seed, b));
        std::uniform_int_distribution<std::size_t> start(0, T - L);
        std::vector<double> sums(m, 0.0);
        std::size_t filled = 0;
        for (std::size_t k = 0; k < n_blocks; ++k) {
            const std::size_t s = start(rng);
            const std::size_t len = std::min(L, T - filled);
            for (std::size_t i = 0; i < m; ++i) sums[i] += prefix[i][s + len] - prefix[i][s];
            filled += len;
        }
        for (std::size_t i = 0; i < m; ++i) boot[b * m + i] = sums[i] / static_cast<double>(T);
    }

    std::vector<std::size_t> alive(m);
    std::iota(alive.begin(), alive.end(), 0);
    double running_p = 0.0;
    const double inf = std::numeric_limits<double>::infinity();

    while (alive.size() > 1) {
        const double k = static_cast<double>(alive.size());
        double avg = 0.0;
        for (auto i : alive) avg += mean[i];
        avg /= k;
        std::vector<double> dbar(alive.size());
        for (std::size_t a = 0; a < alive.size(); ++a) dbar[a] = mean[alive[a]] - avg;

        std::vector<double> var(alive.size(), 0.0);
        std::vector<double> centered(B * alive.size());
        for (std::size_t b = 0; b < B; ++b) {
            double bavg = 0.0;
            for (auto i : alive) bavg += boot[b * m + i];
            bavg /= k;
            for (std::size_t a = 0; a < alive.size(); ++a) {
                const double c = (boot[b * m + alive[a]] - bavg) - dbar[a];
                centered[b * alive.size() + a] = c;
                var[a] += c * c;
            }
        }
        double scale = 0.0;
        for (auto i : alive) scale = std::max(scale, std::abs(mean[i]));
        const double tiny = 1e-24 * std::max(scale * scale, 1e-300);
        std::vector<double> tstat(alive.size());
        bool all_degenerate = true;
        for (std::size_t a = 0; a < alive.size(); ++a) {
            var[a] /= static_cast<double>(B);
            if (var[a] > tiny) {
                all_degenerate = false;
                tstat[a] = dbar[a] / std::sqrt(var[a]);
            } else {
                tstat[a] = dbar[a] > 0.0 ? inf : (dbar[a] < 0.0 ? -inf : 0.0);
                if (dbar[a] != 0.0) all_degenerate = false;
            }
        }
        if (all_degenerate) break;  // identical losses: nothing can be rejected

        const auto worst = static_cast<std::size_t>(
            std::max_element(tstat.begin(), tstat.end()) - tstat.begin());
        const double tmax = tstat[worst];
        std::size_t exceed = 0;
        for (std::size_t b = 0; b < B; ++b) {
            double tb = -inf;
            for (std::size_t a = 0; a < alive.size(); ++a) {
                const double z = var[a] > tiny ? centered[b * alive.size() + a] / std::sqrt(var[a]) : 0.0;
                tb = std::max(tb, z);
            }
            if (tb >= tmax) ++exceed;
        }
        const double p = static_cast<double>(exceed) / static_cast<double>(B);
        running_p = std::max(running_p, p);
        if (running_p >= alpha) break;
        out.eliminated.emplace_back(losses[alive[worst]].first, running_p);
        alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(worst));
    }
    for (auto i : alive) out.included.push_back(losses[i].first);
    return out;
}

// ---------------------------------------------------------------------------
// Score table

std::string_view metric_name(Metric m) {
    switch (m) {
        case Metric::kSquaredError: return "rmse";
        case Metric::kCrps: return "crps";
        case Metric::kLogScore: return "logscore";
    }
    return "?";
}

double record_loss(const ForecastRecord& r, Metric m) {
    switch (m) {
        case Metric::kSquaredError: {
            const double e = r.mean - r.realized;
            return e * e;
        }
        case Metric::kCrps: return crps_mixture(r.predictive, r.realized);
        case Metric::kLogScore: return -log_predictive_score(r.predictive, r.realized);
    }
    return 0.0;
}

const ScoreCell& ScoreTable::cell(const std::string& model, int horizon) const {
    for (const auto& c : cells) {
        if (c.model == model && c.horizon == horizon) return c;
    }
    throw ScoreError("score table has no cell for model '" + model + "' at horizon " +
                     std::to_string(horizon));
}

std::vector<int> ScoreTable::horizons() const {
    std::vector<int> hs;
    for (const auto& c : cells) {
        if (std::find(hs.begin(), hs.end(), c.horizon) == hs.end()) hs.push_back(c.horizon);
    }
    return hs;
}

std::vector<std::string> ScoreTable::models() const {
    std::vector<std::string> ms;
    for (const auto& c : cells) {
        if (std::find(ms.begin(), ms.end(), c.model) == ms.end()) ms.push_back(c.model);
    }
    return ms;
}

ScoreTable build_score_table(std::span<const ForecastRecord> records,
                             const std::string& benchmark_id, const ScoreOptions& options) {
    std::vector<std::string> models;
    std::set<int> horizon_set;
    for (const auto& r : records) {
        if (std::find(models.begin(), models.end(), r.model) == models.end()) models.push_back(r.model);
        horizon_set.insert(r.horizon);
    }
    if (std::find(models.begin(), models.end(), benchmark_id) == models.end()) {
        throw ConfigError("benchmark '" + benchmark_id + "' has no forecast records");
    }
    // Benchmark first, remaining models in order of appearance.
    std::stable_partition(models.begin(), models.end(),
                          [&](const std::string& m) { return m == benchmark_id; });

    ScoreTable table;
    table.benchmark = benchmark_id;
    table.alpha = options.alpha;

    for (int h : horizon_set) {
        // Common evaluation set: targets scorable for every model.
        std::map<std::string, std::map<Date, const ForecastRecord*>> by_model;
        for (const auto& r : records) {
            if (r.horizon == h && r.scorable()) by_model[r.model][r.target] = &r;
        }
        std::vector<Date> common;
        for (const auto& [d, rec] : by_model[benchmark_id]) {
            bool everywhere = true;
            for (const auto& m : models) {
                const auto it = by_model.find(m);
                if (it == by_model.end() || !it->second.count(d)) everywhere = false;
            }
            if (everywhere) common.push_back(d);
        }
        if (common.empty()) {
            throw ScoreError("no common scorable target dates at horizon " + std::to_string(h));
        }

        std::vector<std::array<LossSeries, 3>> loss(models.size());
        for (std::size_t i = 0; i < models.size(); ++i) {
            for (auto metric : kAllMetrics) {
                auto& ls = loss[i][static_cast<std::size_t>(metric)];
                ls.dates = common;
                ls.losses.reserve(common.size());
                for (const Date d : common) {
                    ls.losses.push_back(record_loss(*by_model[models[i]][d], metric));
                }
            }
        }

        std::array<std::vector<std::string>, 3> mcs_members;
        for (auto metric : kAllMetrics) {
            const auto mi = static_cast<std::size_t>(metric);
            std::vector<std::pair<std::string, LossSeries>> set;
            for (std::size_t i = 0; i < models.size(); ++i) set.emplace_back(models[i], loss[i][mi]);
            if (set.size() >= 2) {
                BootstrapConfig bc = options.bootstrap;
                bc.seed = derive_seed(options.bootstrap.seed, static_cast<std::uint64_t>(h), mi);
                mcs_members[mi] = model_confidence_set(set, options.alpha, bc, h).included;
            } else {
                mcs_members[mi] = models;
            }
        }

        const auto& bench = loss.front();
        const double bench_rmse = std::sqrt(bench[0].mean());
        const double bench_crps = bench[1].mean();
        const double bench_log = -bench[2].mean();
        for (std::size_t i = 0; i < models.size(); ++i) {
            ScoreCell c;
            c.model = models[i];
            c.horizon = h;
            c.n = common.size();
            c.benchmark = i == 0;
            c.rmse = std::sqrt(loss[i][0].mean());
            c.crps = loss[i][1].mean();
            c.logscore = -loss[i][2].mean();
            c.rmse_ratio = c.rmse / bench_rmse;
            c.crps_ratio = c.crps / bench_crps;
            c.logscore_diff = c.logscore - bench_log;
            if (i == 0) {
                c.rmse_ratio = 1.0;
                c.crps_ratio = 1.0;
                c.logscore_diff = 0.0;
            }
            for (auto metric : kAllMetrics) {
                const auto mi = static_cast<std::size_t>(metric);
                if (i > 0 && common.size() >= 10) {
                    const auto dm = diebold_mariano(bench[mi], loss[i][mi], h, options.dm);
                    c.dm_stat[mi] = dm.statistic;
                    c.dm_p_one[mi] = dm.p_one_sided;
                    c.dm_p_two[mi] = dm.p_two_sided;
                }
                c.in_mcs[mi] = std::find(mcs_members[mi].begin(), mcs_members[mi].end(),
                                         models[i]) != mcs_members[mi].end();
            }
            table.cells.push_back(std::move(c));
        }
    }
    return table;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr const char* kScoreHeader =
    "benchmark,alpha,model,horizon,n,is_benchmark,rmse,crps,logscore,rmse_ratio,crps_ratio,"
    "logscore_diff,dm_stat_rmse,dm_stat_crps,dm_stat_logscore,dm_p1_rmse,dm_p1_crps,"
    "dm_p1_logscore,dm_p2_rmse,dm_p2_crps,dm_p2_logscore,mcs_rmse,mcs_crps,mcs_logscore";

double need_double(const std::string& text, const char* field) {
    double v = 0.0;
    if (!parse_double(text, v) || std::isnan(v)) {
        throw IoError(std::string("score table field '") + field + "' is not a number: '" + text + "'");
    }
    return v;
}

}  // namespace

void write_score_csv(const ScoreTable& table, std::ostream& out) {
    out << kScoreHeader << '\n';
    for (const auto& c : table.cells) {
        out << table.benchmark << ',' << format_double(table.alpha) << ',' << c.model << ','
            << c.horizon << ',' << c.n << ',' << (c.benchmark ? 1 : 0) << ','
            << format_double(c.rmse) << ',' << format_double(c.crps) << ','
            << format_double(c.logscore) << ',' << format_double(c.rmse_ratio) << ','
            << format_double(c.crps_ratio) << ',' << format_double(c.logscore_diff);
        for (double v : c.dm_stat) out << ',' << format_double(v);
        for (double v : c.dm_p_one) out << ',' << format_double(v);
        for (double v : c.dm_p_two) out << ',' << format_double(v);
        for (bool v : c.in_mcs) out << ',' << (v ? 1 : 0);
        out << '\n';
    }
}

ScoreTable read_score_csv(std::istream& in) {
    const auto rows = read_csv(in);
    if (rows.empty() || join_csv_row(rows.front()) != kScoreHeader) {
        throw IoError("score table CSV has an unexpected header");
    }
    ScoreTable table;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& f = rows[r];
        if (f.size() != 24) throw IoError("score table row " + std::to_string(r) + " has wrong arity");
        table.benchmark = f[0];
        table.alpha = need_double(f[1], "alpha");
        ScoreCell c;
        c.model = f[2];
        c.horizon = static_cast<int>(need_double(f[3], "horizon"));
        c.n = static_cast<std::size_t>(need_double(f[4], "n"));
        c.benchmark = f[5] == "1";
        c.rmse = need_double(f[6], "rmse");
        c.crps = need_double(f[7], "crps");
        c.logscore = need_double(f[8], "logscore");
        c.rmse_ratio = need_double(f[9], "rmse_ratio");
        c.crps_ratio = need_double(f[10], "crps_ratio");
        c.logscore_diff = need_double(f[11], "logscore_diff");
        for (std::size_t k = 0; k < 3; ++k) {
            c.dm_stat[k] = need_double(f[12 + k], "dm_stat");
            c.dm_p_one[k] = need_double(f[15 + k], "dm_p1");
            c.dm_p_two[k] = need_double(f[18 + k], "dm_p2");
            c.in_mcs[k] = f[21 + k] == "1";
        }
        table.cells.push_back(std::move(c));
    }
    return table;
}

void write_score_markdown(const ScoreTable& table, std::ostream& out) {
    const auto horizons = table.horizons();
    const auto models = table.models();
    struct Panel {
        Metric metric;
        const char* title;
    };
    const Panel panels[] = {{Metric::kSquaredError, "RMSE"},
                            {Metric::kLogScore, "Log predictive score"},
                            {Metric::kCrps, "CRPS"}};
    for (const auto& panel : panels) {
        const auto mi = static_cast<std::size_t>(panel.metric);
        std::vector<std::vector<std::string>> grid;
        std::vector<std::string> head{"model"};
        for (int h : horizons) head.push_back("h=" + std::to_string(h));
        grid.push_back(head);
        for (const auto& m : models) {
            std::vector<std::string> row{m};
            for (int h : horizons) {
                const auto& c = table.cell(m, h);
                double v = 0.0;
                if (c.benchmark) {
                    v = panel.metric == Metric::kSquaredError ? c.rmse
                        : panel.metric == Metric::kCrps        ? c.crps
                                                                : c.logscore;
                } else {
                    v = panel.metric == Metric::kSquaredError ? c.rmse_ratio
                        : panel.metric == Metric::kCrps        ? c.crps_ratio
                                                                : c.logscore_diff;
                }
                std::string s = strfmt("%.3f", v);
                if (!c.benchmark) s += significance_stars(c.dm_p_one[mi]);
                if (c.in_mcs[mi]) s += " [M]";
                row.push_back(std::move(s));
            }
            grid.push_back(std::move(row));
        }
        std::vector<std::size_t> width(grid.front().size(), 0);
        for (const auto& row : grid) {
            for (std::size_t j = 0; j < row.size(); ++j) width[j] = std::max(width[j], row[j].size());
        }
        out << "### " << panel.title << "\n\n";
        for (std::size_t r = 0; r < grid.size(); ++r) {
            out << '|';
            for (std::size_t j = 0; j < grid[r].size(); ++j) {
                out << ' ' << (j == 0 ? std::left : std::right) << std::setw(static_cast<int>(width[j]))
                    << grid[r][j] << " |";
            }
            out << '\n';
            if (r == 0) {
                out << '|';
                for (std::size_t j = 0; j < width.size(); ++j) {
                    out << (j == 0 ? ":" : "-") << std::string(width[j], '-') << (j == 0 ? "-|" : ":|");
                }
                out << '\n';
            }
        }
        out << std::right << '\n';
    }
    out << "Benchmark " << table.benchmark
        << " in levels; other rows are RMSE/CRPS ratios and log-score differences.\n"
        << "Stars: one-sided Diebold-Mariano significance at 10/5/1 %. [M]: in the "
        << strfmt("%g", 100.0 * (1.0 - table.alpha)) << " % model confidence set.\n";
}

void write_score_jsonl(const ScoreTable& table, std::ostream& out) {
    for (const auto& c : table.cells) {
        for (auto metric : kAllMetrics) {
            const auto mi = static_cast<std::size_t>(metric);
            nlohmann::json j;
            j["model"] = c.model;
            j["horizon"] = c.horizon;
            j["metric"] = std::string(metric_name(metric));
            j["n"] = c.n;
            j["benchmark"] = c.benchmark;
            j["level"] = metric == Metric::kSquaredError ? c.rmse
                         : metric == Metric::kCrps        ? c.crps
                                                          : c.logscore;
            j["relative"] = metric == Metric::kSquaredError ? c.rmse_ratio
                            : metric == Metric::kCrps        ? c.crps_ratio
                                                             : c.logscore_diff;
            auto finite_or_null = [](double v) {
                return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(format_double(v));
            };
            j["dm_stat"] = finite_or_null(c.dm_stat[mi]);
            j["dm_p_one_sided"] = c.dm_p_one[mi];
            j["dm_p_two_sided"] = c.dm_p_two[mi];
            j["in_mcs"] = c.in_mcs[mi];
            out << j.dump() << '\n';
        }
    }
}

void write_mcs_report(const ScoreTable& table, std::ostream& out) {
    out << "metric,horizon,alpha,members\n";
    for (auto metric : kAllMetrics) {
        const auto mi = static_cast<std::size_t>(metric);
        for (int h : table.horizons()) {
            std::string members;
            for (const auto& c : table.cells) {
                if (c.horizon == h && c.in_mcs[mi]) {
                    if (!members.empty()) members += ';';
                    members += c.model;
                }
            }
            out << metric_name(metric) << ',' << h << ',' << format_double(table.alpha) << ','
                << members << '\n';
        }
    }
}

}  // namespace rumidas
