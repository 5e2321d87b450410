#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rumidas/design.hpp"

namespace rumidas {

/// Independent prior: gamma ~ N(gamma_mean, gamma_cov), sigma^-2 ~ Ga(a, b)
/// with shape a and rate b.
struct NormalGammaPrior {
    Eigen::VectorXd gamma_mean;
    Eigen::MatrixXd gamma_cov;
    double a = 0.01;
    double b = 0.01;

    /// Zero mean, variance * I, vague Gamma.
    static NormalGammaPrior diffuse(std::size_t dim, double variance = 1e6, double a = 0.01,
                                    double b = 0.01);

    std::size_t dim() const { return static_cast<std::size_t>(gamma_mean.size()); }
    void validate(std::size_t expected_dim) const;
};

/// How the coefficient block is drawn. Both routes target the same
/// conditional; Spectral diagonalizes the data precision once per fit so each
/// iteration costs O(p) instead of a fresh p^3 factorization.
enum class SamplerRoute { kCholesky, kSpectral };

SamplerRoute parse_sampler_route(std::string_view text);
std::string_view sampler_route_name(SamplerRoute r);

struct McmcConfig {
    int n_draws = 6000;
    int burn_in = 1000;
    std::uint64_t seed = 0;
    int thin = 1;
    SamplerRoute route = SamplerRoute::kCholesky;
    /// Test hooks: freeze one block of the sampler at a given value.
    std::optional<double> fixed_sigma2;
    std::optional<Eigen::VectorXd> fixed_gamma;

    std::size_t retained() const {
        return static_cast<std::size_t>((n_draws - burn_in) / thin);
    }
    void validate() const;
};

struct PosteriorDraws {
    Eigen::MatrixXd gamma;  // retained draws x columns
    Eigen::VectorXd sigma2;
    std::vector<std::string> column_names;

    std::size_t size() const { return static_cast<std::size_t>(sigma2.size()); }
};

/// Cross products of a regression sample; everything the sampler reads.
struct RegressionMoments {
    Eigen::MatrixXd xtx;
    Eigen::VectorXd xty;
    double yty = 0.0;
    std::size_t n = 0;

    static RegressionMoments from(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                  const Eigen::Ref<const Eigen::VectorXd>& y);
    std::size_t dim() const { return static_cast<std::size_t>(xty.size()); }
};

/// Mean and covariance of gamma | sigma2, data.
struct ConditionalPosterior {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

ConditionalPosterior gamma_conditional(const RegressionMoments& m, const NormalGammaPrior& prior,
                                       double sigma2);

/// Shape and rate of sigma^-2 | gamma, data.
std::pair<double, double> precision_conditional(const RegressionMoments& m,
                                                const NormalGammaPrior& prior,
                                                const Eigen::VectorXd& gamma);

PosteriorDraws gibbs_sample(const RegressionMoments& moments, const NormalGammaPrior& prior,
                            const McmcConfig& cfg, std::vector<std::string> column_names = {});

PosteriorDraws gibbs_sample(const DesignMatrix& design, const NormalGammaPrior& prior,
                            const McmcConfig& cfg);

/// Equal-weight Gaussian mixture over posterior draws.
class PredictiveDensity {
public:
    PredictiveDensity() = default;
    PredictiveDensity(std::vector<double> means, std::vector<double> variances);

    std::size_t size() const { return means_.size(); }
    const std::vector<double>& means() const { return means_; }
    const std::vector<double>& variances() const { return variances_; }

    double mean() const;
    double variance() const;
    double cdf(double x) const;
    double quantile(double p) const;
    std::vector<double> sample(std::size_t n, std::uint64_t seed) const;

    /// Keeps at most `max_components` components, evenly spaced over the draws.
    PredictiveDensity thinned(std::size_t max_components) const;

private:
    std::vector<double> means_;
    std::vector<double> variances_;
};

PredictiveDensity posterior_predictive(const PosteriorDraws& draws, const Eigen::VectorXd& z);

/// Writes one row per retained draw: the coefficient columns then sigma2.
void write_draws_csv(const PosteriorDraws& draws, std::ostream& out);

/// SplitMix64 mix of a master seed with task coordinates.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0);

}  // namespace rumidas
