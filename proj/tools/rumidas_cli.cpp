#include <CLI11.hpp>
#include <iostream>

#include "rumidas/pipeline.hpp"

int main(int argc, char** argv) {
    using namespace rumidas;

    CLI::App app{"Bayesian reverse-MIDAS forecasting of daily series with monthly predictors"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    Overrides overrides;
    std::string output;
    int jobs = 0;
    std::uint64_t seed = 0;

    std::string config;
    auto* validate = app.add_subcommand("validate", "Check a run config and its data without sampling");
    validate->add_option("config", config, "Run config (JSON) or manifest")->required();

    auto* forecast = app.add_subcommand("forecast", "Run the rolling forecast sweep and score it");
    forecast->add_option("config", config, "Run config (JSON) or manifest")->required();
    auto* f_out = forecast->add_option("-o,--output", output, "Output directory");
    auto* f_jobs = forecast->add_option("-j,--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
    auto* f_seed = forecast->add_option("--seed", seed, "Master seed");

    auto* simulate = app.add_subcommand("simulate", "Write a synthetic data bundle");
    simulate->add_option("config", config, "DGP config (JSON)")->required();
    auto* s_out = simulate->add_option("-o,--output", output, "Output directory");
    auto* s_seed = simulate->add_option("--seed", seed, "Simulation seed");

    ScoreRequest score_req;
    std::string score_config;
    double alpha = 0.0;
    int n_boot = 0;
    auto* score = app.add_subcommand("score", "Re-score an existing forecasts.csv");
    score->add_option("forecasts", score_req.forecasts, "forecasts.csv from a previous run")->required();
    auto* c_cfg = score->add_option("-c,--config", score_config, "Config or manifest with scoring settings");
    score->add_option("-b,--benchmark", score_req.benchmark, "Benchmark model name");
    auto* c_alpha = score->add_option("--alpha", alpha, "MCS size");
    auto* c_boot = score->add_option("--n-boot", n_boot, "Bootstrap replications");
    auto* c_out = score->add_option("-o,--output", output, "Output directory");
    auto* c_seed = score->add_option("--seed", seed, "Master seed");

    CLI11_PARSE(app, argc, argv);

    if (*f_out || *s_out || *c_out) overrides.output = output;
    if (*f_jobs) overrides.jobs = jobs;
    if (*f_seed || *s_seed || *c_seed) overrides.seed = seed;

    if (validate->parsed()) return cmd_validate(config, std::cout, std::cerr);
    if (forecast->parsed()) return cmd_forecast(config, overrides, std::cout, std::cerr);
    if (simulate->parsed()) return cmd_simulate(config, overrides, std::cout, std::cerr);
    if (*c_cfg) score_req.config = score_config;
    if (*c_alpha) score_req.alpha = alpha;
    if (*c_boot) score_req.n_boot = n_boot;
    return cmd_score(score_req, overrides, std::cout, std::cerr);
}
