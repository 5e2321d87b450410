#include "rumidas/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "rumidas/error.hpp"
#include "rumidas/format.hpp"

namespace rumidas {

namespace {

constexpr double kSymmetryTol = 1e-10;

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double condition_number(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    if (ev.size() == 0) return 1.0;
    const double lo = ev.minCoeff();
    const double hi = ev.maxCoeff();
    return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

[[noreturn]] void throw_not_spd(const char* what, const Eigen::MatrixXd& m) {
    throw NumericalError(strfmt("%s is not positive definite (condition number %.3e)", what,
                                condition_number(m)));
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

struct PriorPrecision {
    Eigen::MatrixXd precision;   // V^-1
    Eigen::VectorXd prec_mean;   // V^-1 * mean
};

PriorPrecision prior_precision(const NormalGammaPrior& prior) {
    Eigen::LLT<Eigen::MatrixXd> llt(prior.gamma_cov);
    if (llt.info() != Eigen::Success) throw_not_spd("prior covariance", prior.gamma_cov);
    const auto p = prior.gamma_cov.rows();
    PriorPrecision out;
    out.precision = symmetrized(llt.solve(Eigen::MatrixXd::Identity(p, p)));
    out.prec_mean = llt.solve(prior.gamma_mean);
    return out;
}

double residual_ss(const RegressionMoments& m, const Eigen::VectorXd& gamma) {
    const double ss = m.yty - 2.0 * gamma.dot(m.xty) + gamma.dot(m.xtx * gamma);
    return std::max(ss, 0.0);
}

double initial_sigma2(const RegressionMoments& m) {
    const auto p = m.dim();
    if (m.n <= p || p == 0) return 1.0;
    Eigen::LLT<Eigen::MatrixXd> llt(m.xtx);
    if (llt.info() != Eigen::Success) return 1.0;
    const Eigen::VectorXd ols = llt.solve(m.xty);
    const double s2 = residual_ss(m, ols) / static_cast<double>(m.n - p);
    return (std::isfinite(s2) && s2 > 0.0) ? s2 : 1.0;
}

double draw_sigma2(std::mt19937_64& rng, double shape, double rate) {
    std::gamma_distribution<double> ga(shape, 1.0 / rate);
    const double precision = ga(rng);
    const double s2 = 1.0 / precision;
    if (!(precision > 0.0) || !std::isfinite(s2)) {
        throw NumericalError(strfmt("precision draw degenerated (shape %.6g, rate %.6g)", shape, rate));
    }
    return s2;
}

void fill_normal(std::mt19937_64& rng, std::normal_distribution<double>& nd, Eigen::VectorXd& eps) {
    for (Eigen::Index i = 0; i < eps.size(); ++i) eps[i] = nd(rng);
}

// Draw gamma | sigma2 by forming the conditional covariance and factoring it.
class CholeskyKernel {
public:
    CholeskyKernel(const RegressionMoments& m, const PriorPrecision& pp) : m_(m), pp_(pp) {}

    void draw(double sigma2, std::mt19937_64& rng, std::normal_distribution<double>& nd,
              Eigen::VectorXd& eps, Eigen::VectorXd& gamma) const {
        const double s = 1.0 / sigma2;
        const Eigen::MatrixXd post_prec = symmetrized(pp_.precision + s * m_.xtx);
        Eigen::LLT<Eigen::MatrixXd> prec_llt(post_prec);
        if (prec_llt.info() != Eigen::Success) throw_not_spd("posterior precision", post_prec);
        const auto p = post_prec.rows();
        Eigen::MatrixXd cov = prec_llt.solve(Eigen::MatrixXd::Identity(p, p));
        cov = symmetrized(cov);
        const Eigen::VectorXd mean = cov * (pp_.prec_mean + s * m_.xty);
        Eigen::LLT<Eigen::MatrixXd> cov_llt(cov);
        if (cov_llt.info() != Eigen::Success) throw_not_spd("posterior covariance", cov);
        fill_normal(rng, nd, eps);
        gamma = mean + cov_llt.matrixL() * eps;
    }

private:
    const RegressionMoments& m_;
    const PriorPrecision& pp_;
};

// Simultaneous diagonalization of prior and data precision:
//   V^-1 = R R',  R^-1 X'X R^-T = Q diag(lambda) Q',  M = R^-T Q
// so that Cov(gamma | sigma2) = M diag(1 / (1 + lambda / sigma2)) M'.
// The chain runs in eta = M^-1 gamma coordinates.
class SpectralKernel {
public:
    SpectralKernel(const RegressionMoments& m, const PriorPrecision& pp) {
        Eigen::LLT<Eigen::MatrixXd> r_llt(pp.precision);
        if (r_llt.info() != Eigen::Success) throw_not_spd("prior precision", pp.precision);
        const Eigen::MatrixXd R = r_llt.matrixL();
        const auto Rtri = R.triangularView<Eigen::Lower>();
        Eigen::MatrixXd B = Rtri.solve(m.xtx);
        B = Rtri.solve(B.transpose().eval());
        B = symmetrized(B);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
        if (es.info() != Eigen::Success) {
            throw NumericalError("eigendecomposition of the scaled data precision failed");
        }
        lambda_ = es.eigenvalues();
        const double scale = std::max(1.0, lambda_.cwiseAbs().maxCoeff());
        for (Eigen::Index i = 0; i < lambda_.size(); ++i) {
            if (lambda_[i] < -1e-9 * scale) throw_not_spd("data cross-product matrix", m.xtx);
            lambda_[i] = std::max(lambda_[i], 0.0);
        }
        M_ = R.transpose().triangularView<Eigen::Upper>().solve(es.eigenvectors());
        w_ = M_.transpose() * pp.prec_mean;
        u_ = M_.transpose() * m.xty;
        yty_ = m.yty;
    }

    void draw(double sigma2, std::mt19937_64& rng, std::normal_distribution<double>& nd,
              Eigen::VectorXd& eps, Eigen::VectorXd& eta) const {
        const double s = 1.0 / sigma2;
        fill_normal(rng, nd, eps);
        for (Eigen::Index i = 0; i < eta.size(); ++i) {
            const double d = 1.0 + s * lambda_[i];
            eta[i] = (w_[i] + s * u_[i]) / d + eps[i] / std::sqrt(d);
        }
    }

    double residual_ss(const Eigen::VectorXd& eta) const {
        const double ss = yty_ - 2.0 * eta.dot(u_) + (lambda_.array() * eta.array().square()).sum();
        return std::max(ss, 0.0);
    }

    Eigen::VectorXd to_eta(const Eigen::VectorXd& gamma) const {
        return M_.fullPivLu().solve(gamma);
    }

    const Eigen::MatrixXd& basis() const { return M_; }

private:
    Eigen::VectorXd lambda_;
    Eigen::MatrixXd M_;
    Eigen::VectorXd w_;
    Eigen::VectorXd u_;
    double yty_ = 0.0;
};

}  // namespace

// ---------------------------------------------------------------------------

NormalGammaPrior NormalGammaPrior::diffuse(std::size_t dim, double variance, double a, double b) {
    const auto p = static_cast<Eigen::Index>(dim);
    NormalGammaPrior prior;
    prior.gamma_mean = Eigen::VectorXd::Zero(p);
    prior.gamma_cov = variance * Eigen::MatrixXd::Identity(p, p);
    prior.a = a;
    prior.b = b;
    return prior;
}

void NormalGammaPrior::validate(std::size_t expected_dim) const {
    if (dim() != expected_dim || static_cast<std::size_t>(gamma_cov.rows()) != expected_dim ||
        static_cast<std::size_t>(gamma_cov.cols()) != expected_dim) {
        throw SpecError(strfmt("prior dimension %zu does not match %zu design columns", dim(),
                               expected_dim));
    }
    if (!(a > 0.0) || !(b > 0.0)) throw SpecError("Gamma prior shape and rate must be > 0");
    if (expected_dim > 0 &&
        (gamma_cov - gamma_cov.transpose()).cwiseAbs().maxCoeff() >
            kSymmetryTol * std::max(1.0, gamma_cov.cwiseAbs().maxCoeff())) {
        throw SpecError("prior covariance is not symmetric");
    }
    if (expected_dim > 0) {
        Eigen::LLT<Eigen::MatrixXd> llt(gamma_cov);
        if (llt.info() != Eigen::Success) {
            throw SpecError(strfmt("prior covariance is not positive definite (condition number %.3e)",
                                   condition_number(gamma_cov)));
        }
    }
}

SamplerRoute parse_sampler_route(std::string_view text) {
    if (text == "cholesky") return SamplerRoute::kCholesky;
    if (text == "spectral") return SamplerRoute::kSpectral;
    throw SpecError("unknown sampler route '" + std::string(text) + "'");
}

std::string_view sampler_route_name(SamplerRoute r) {
    return r == SamplerRoute::kCholesky ? "cholesky" : "spectral";
}

void McmcConfig::validate() const {
    if (n_draws < 1) throw SpecError("n_draws must be >= 1");
    if (burn_in < 0 || burn_in >= n_draws) throw SpecError("burn_in must be in [0, n_draws)");
    if (thin < 1) throw SpecError("thin must be >= 1");
    if (retained() == 0) throw SpecError("MCMC settings retain no draws");
    if (fixed_sigma2 && !(*fixed_sigma2 > 0.0)) throw SpecError("fixed sigma2 must be > 0");
}

RegressionMoments RegressionMoments::from(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                          const Eigen::Ref<const Eigen::VectorXd>& y) {
    if (X.rows() != y.size()) throw SpecError("design rows and regressand length differ");
    RegressionMoments m;
    const auto p = X.cols();
    m.xtx = Eigen::MatrixXd::Zero(p, p);
    m.xtx.selfadjointView<Eigen::Lower>().rankUpdate(X.transpose());
    m.xtx = m.xtx.selfadjointView<Eigen::Lower>();
    m.xty = X.transpose() * y;
    m.yty = y.squaredNorm();
    m.n = static_cast<std::size_t>(X.rows());
    return m;
}

ConditionalPosterior gamma_conditional(const RegressionMoments& m, const NormalGammaPrior& prior,
                                       double sigma2) {
    prior.validate(m.dim());
    const auto pp = prior_precision(prior);
    const auto p = static_cast<Eigen::Index>(m.dim());
    const Eigen::MatrixXd post_prec = symmetrized(pp.precision + m.xtx / sigma2);
    Eigen::LLT<Eigen::MatrixXd> llt(post_prec);
    if (llt.info() != Eigen::Success) throw_not_spd("posterior precision", post_prec);
    ConditionalPosterior out;
    out.cov = symmetrized(llt.solve(Eigen::MatrixXd::Identity(p, p)));
    out.mean = out.cov * (pp.prec_mean + m.xty / sigma2);
    return out;
}

std::pair<double, double> precision_conditional(const RegressionMoments& m,
                                                const NormalGammaPrior& prior,
                                                const Eigen::VectorXd& gamma) {
    return {prior.a + 0.5 * static_cast<double>(m.n), prior.b + 0.5 * residual_ss(m, gamma)};
}

PosteriorDraws gibbs_sample(const RegressionMoments& m, const NormalGammaPrior& prior,
                            const McmcConfig& cfg, std::vector<std::string> column_names) {
    cfg.validate();
    prior.validate(m.dim());
    const auto p = static_cast<Eigen::Index>(m.dim());
    if (!column_names.empty() && column_names.size() != m.dim()) {
        throw SpecError("column name count does not match design columns");
    }
    if (cfg.fixed_gamma && cfg.fixed_gamma->size() != p) {
        throw SpecError("fixed gamma has the wrong dimension");
    }

    const auto pp = prior_precision(prior);
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    const auto keep = static_cast<Eigen::Index>(cfg.retained());
    const double shape = prior.a + 0.5 * static_cast<double>(m.n);

    PosteriorDraws out;
    out.column_names = std::move(column_names);
    out.sigma2.resize(keep);
    Eigen::MatrixXd stored(keep, p);  // gamma rows, or eta rows for the spectral route

    double sigma2 = cfg.fixed_sigma2 ? *cfg.fixed_sigma2 : initial_sigma2(m);
    Eigen::VectorXd eps(p);
    Eigen::VectorXd state = Eigen::VectorXd::Zero(p);

    auto retain = [&](int iter, Eigen::Index& slot) {
        if (iter < cfg.burn_in || (iter - cfg.burn_in + 1) % cfg.thin != 0 || slot >= keep) return;
        stored.row(slot) = state.transpose();
        out.sigma2[slot] = sigma2;
        ++slot;
    };

    Eigen::Index slot = 0;
    if (cfg.route == SamplerRoute::kSpectral) {
        const SpectralKernel kernel(m, pp);
        if (cfg.fixed_gamma) state = kernel.to_eta(*cfg.fixed_gamma);
        for (int iter = 0; iter < cfg.n_draws; ++iter) {
            if (!cfg.fixed_gamma) kernel.draw(sigma2, rng, nd, eps, state);
            if (!cfg.fixed_sigma2) {
                sigma2 = draw_sigma2(rng, shape, prior.b + 0.5 * kernel.residual_ss(state));
            }
            retain(iter, slot);
        }
        out.gamma = stored * kernel.basis().transpose();
        if (cfg.fixed_gamma) out.gamma.rowwise() = cfg.fixed_gamma->transpose();
    } else {
        const CholeskyKernel kernel(m, pp);
        if (cfg.fixed_gamma) state = *cfg.fixed_gamma;
        for (int iter = 0; iter < cfg.n_draws; ++iter) {
            if (!cfg.fixed_gamma) kernel.draw(sigma2, rng, nd, eps, state);
            if (!cfg.fixed_sigma2) {
                sigma2 = draw_sigma2(rng, shape, prior.b + 0.5 * residual_ss(m, state));
            }
            retain(iter, slot);
        }
        out.gamma = std::move(stored);
    }
    return out;
}

PosteriorDraws gibbs_sample(const DesignMatrix& design, const NormalGammaPrior& prior,
                            const McmcConfig& cfg) {
    if (design.rows() < 1) throw SpecError("design has no rows");
    return gibbs_sample(RegressionMoments::from(design.X, design.y), prior, cfg,
                        design.column_names);
}

// ---------------------------------------------------------------------------

PredictiveDensity::PredictiveDensity(std::vector<double> means, std::vector<double> variances)
    : means_(std::move(means)), variances_(std::move(variances)) {
    if (means_.size() != variances_.size()) {
        throw SpecError("predictive density has mismatched component arrays");
    }
}

double PredictiveDensity::mean() const {
    if (means_.empty()) return std::numeric_limits<double>::quiet_NaN();
    return std::accumulate(means_.begin(), means_.end(), 0.0) / static_cast<double>(means_.size());
}

double PredictiveDensity::variance() const {
    if (means_.empty()) return std::numeric_limits<double>::quiet_NaN();
    const double mu = mean();
    double acc = 0.0;
    for (std::size_t s = 0; s < means_.size(); ++s) {
        acc += variances_[s] + (means_[s] - mu) * (means_[s] - mu);
    }
    return acc / static_cast<double>(means_.size());
}

double PredictiveDensity::cdf(double x) const {
    double acc = 0.0;
    for (std::size_t s = 0; s < means_.size(); ++s) {
        const double sd = std::sqrt(variances_[s]);
        acc += sd > 0.0 ? normal_cdf((x - means_[s]) / sd) : (x >= means_[s] ? 1.0 : 0.0);
    }
    return acc / static_cast<double>(means_.size());
}

double PredictiveDensity::quantile(double p) const {
    if (means_.empty() || !(p > 0.0 && p < 1.0)) {
        throw SpecError("quantile needs a nonempty density and p in (0, 1)");
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t s = 0; s < means_.size(); ++s) {
        const double sd = std::sqrt(variances_[s]);
        lo = std::min(lo, means_[s] - 40.0 * sd - 1e-12);
        hi = std::max(hi, means_[s] + 40.0 * sd + 1e-12);
    }
    for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        (cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<double> PredictiveDensity::sample(std::size_t n, std::uint64_t seed) const {
    if (means_.empty()) throw SpecError("cannot sample an empty predictive density");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, means_.size() - 1);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::vector<double> out(n);
    for (auto& v : out) {
        const std::size_t s = pick(rng);
        v = means_[s] + std::sqrt(variances_[s]) * nd(rng);
    }
    return out;
}

PredictiveDensity PredictiveDensity::thinned(std::size_t max_components) const {
    if (max_components == 0 || means_.size() <= max_components) return *this;
    std::vector<double> m(max_components);
    std::vector<double> v(max_components);
    for (std::size_t i = 0; i < max_components; ++i) {
        const std::size_t s = i * means_.size() / max_components;
        m[i] = means_[s];
        v[i] = variances_[s];
    }
    return PredictiveDensity(std::move(m), std::move(v));
}

PredictiveDensity posterior_predictive(const PosteriorDraws& draws, const Eigen::VectorXd& z) {
    if (z.size() != draws.gamma.cols()) {
        throw SpecError(strfmt("regressor vector has %ld entries, draws have %ld columns",
                               static_cast<long>(z.size()), static_cast<long>(draws.gamma.cols())));
    }
    const Eigen::VectorXd mu = draws.gamma * z;
    std::vector<double> means(mu.data(), mu.data() + mu.size());
    std::vector<double> vars(draws.sigma2.data(), draws.sigma2.data() + draws.sigma2.size());
    return PredictiveDensity(std::move(means), std::move(vars));
}

void write_draws_csv(const PosteriorDraws& draws, std::ostream& out) {
    const auto p = draws.gamma.cols();
    for (Eigen::Index c = 0; c < p; ++c) {
        out << (static_cast<std::size_t>(c) < draws.column_names.size()
                    ? draws.column_names[static_cast<std::size_t>(c)]
                    : "g" + std::to_string(c))
            << ',';
    }
    out << "sigma2\n";
    for (Eigen::Index r = 0; r < draws.gamma.rows(); ++r) {
        for (Eigen::Index c = 0; c < p; ++c) out << format_double(draws.gamma(r, c)) << ',';
        out << format_double(draws.sigma2[r]) << '\n';
    }
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    auto mix = [](std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    };
    std::uint64_t h = mix(master);
    h = mix(h ^ a);
    h = mix(h ^ b);
    h = mix(h ^ c);
    return h;
}

}  // namespace rumidas
