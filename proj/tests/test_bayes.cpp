#include <doctest.h>

#include <random>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "rumidas/bayes.hpp"
#include "rumidas/error.hpp"

using namespace rumidas;

namespace {

struct Problem {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    Eigen::VectorXd truth;
};

Problem simulate(Eigen::Index T, Eigen::Index p, double sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    Problem pr;
    pr.X.resize(T, p);
    for (Eigen::Index i = 0; i < T; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) pr.X(i, j) = z(rng);
    }
    pr.truth.resize(p);
    for (Eigen::Index j = 0; j < p; ++j) pr.truth[j] = z(rng);
    pr.y = pr.X * pr.truth;
    for (Eigen::Index i = 0; i < T; ++i) pr.y[i] += sigma * z(rng);
    return pr;
}

NormalGammaPrior informative_prior(Eigen::Index p, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    Eigen::MatrixXd A(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) A(i, j) = z(rng);
    }
    NormalGammaPrior prior;
    prior.gamma_cov = A * A.transpose() / static_cast<double>(p) + Eigen::MatrixXd::Identity(p, p);
    prior.gamma_mean.resize(p);
    for (Eigen::Index j = 0; j < p; ++j) prior.gamma_mean[j] = z(rng);
    prior.a = 2.0;
    prior.b = 1.5;
    return prior;
}

double frobenius_rel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (a - b).norm() / b.norm(); }

}  // namespace

TEST_CASE("conditional of gamma matches explicit-inverse formula") {
    const auto pr = simulate(60, 6, 0.7, 1);
    const auto prior = informative_prior(6, 2);
    const auto m = RegressionMoments::from(pr.X, pr.y);
    for (double s2 : {0.1, 1.0, 25.0}) {
        const auto got = gamma_conditional(m, prior, s2);
        const auto want = oracle::gamma_given_sigma2(pr.X, pr.y, prior.gamma_mean, prior.gamma_cov, s2);
        CHECK((got.mean - want.mean).norm() / want.mean.norm() < 1e-10);
        CHECK(frobenius_rel(got.cov, want.cov) < 1e-10);
    }
}

TEST_CASE("conditional of the precision is Ga(a + T/2, b + SSR/2)") {
    const auto pr = simulate(80, 4, 1.3, 3);
    const auto prior = informative_prior(4, 4);
    const auto m = RegressionMoments::from(pr.X, pr.y);
    const Eigen::VectorXd g = pr.truth * 0.9;
    const auto [shape, rate] = precision_conditional(m, prior, g);
    const auto [ws, wr] = oracle::precision_given_gamma(pr.X, pr.y, prior.a, prior.b, g);
    CHECK(shape == doctest::Approx(ws).epsilon(1e-14));
    CHECK(rate == doctest::Approx(wr).epsilon(1e-10));
}

TEST_CASE("with sigma2 frozen the gamma chain targets the conditional, on both routes") {
    const auto pr = simulate(200, 10, 1.0, 5);
    const auto prior = NormalGammaPrior::diffuse(10);
    const auto m = RegressionMoments::from(pr.X, pr.y);
    const auto want = oracle::gamma_given_sigma2(pr.X, pr.y, prior.gamma_mean, prior.gamma_cov, 1.0);
    for (auto route : {SamplerRoute::kCholesky, SamplerRoute::kSpectral}) {
        McmcConfig cfg;
        cfg.n_draws = 21000;
        cfg.burn_in = 1000;
        cfg.seed = 77;
        cfg.route = route;
        cfg.fixed_sigma2 = 1.0;
        const auto draws = gibbs_sample(m, prior, cfg);
        REQUIRE(draws.size() == 20000);
        const auto [mean, cov] = oracle::moments(draws.gamma);
        for (Eigen::Index j = 0; j < 10; ++j) {
            const double se = std::sqrt(want.cov(j, j) / 20000.0);
            CHECK(std::abs(mean[j] - want.mean[j]) < 3.0 * se);
        }
        CHECK(frobenius_rel(cov, want.cov) < 0.05);
        CHECK((draws.sigma2.array() == 1.0).all());
    }
}

TEST_CASE("with gamma frozen the precision chain mean converges to shape/rate") {
    const auto pr = simulate(150, 3, 2.0, 6);
    const auto prior = NormalGammaPrior::diffuse(3);
    const auto m = RegressionMoments::from(pr.X, pr.y);
    McmcConfig cfg;
    cfg.n_draws = 101000;
    cfg.burn_in = 1000;
    cfg.seed = 8;
    cfg.fixed_gamma = pr.truth;
    const auto draws = gibbs_sample(m, prior, cfg);
    const auto [shape, rate] = oracle::precision_given_gamma(pr.X, pr.y, prior.a, prior.b, pr.truth);
    const double mean_prec = (1.0 / draws.sigma2.array()).mean();
    CHECK(std::abs(mean_prec / (shape / rate) - 1.0) < 0.01);
    CHECK((draws.gamma.rowwise() - pr.truth.transpose()).isZero());
}

TEST_CASE("without data the draws reproduce the prior") {
    const auto prior = informative_prior(3, 10);
    const auto m = RegressionMoments::from(Eigen::MatrixXd(0, 3), Eigen::VectorXd(0));
    for (auto route : {SamplerRoute::kCholesky, SamplerRoute::kSpectral}) {
        McmcConfig cfg;
        cfg.n_draws = 41000;
        cfg.burn_in = 1000;
        cfg.seed = 11;
        cfg.route = route;
        const auto draws = gibbs_sample(m, prior, cfg);
        const auto [mean, cov] = oracle::moments(draws.gamma);
        for (Eigen::Index j = 0; j < 3; ++j) {
            CHECK(std::abs(mean[j] - prior.gamma_mean[j]) < 4.0 * std::sqrt(prior.gamma_cov(j, j) / 40000.0));
        }
        CHECK(frobenius_rel(cov, prior.gamma_cov) < 0.05);
        const Eigen::ArrayXd prec = 1.0 / draws.sigma2.array();
        CHECK(prec.mean() == doctest::Approx(prior.a / prior.b).epsilon(0.03));
        const double var = (prec - prec.mean()).square().mean();
        CHECK(var == doctest::Approx(prior.a / (prior.b * prior.b)).epsilon(0.06));
    }
}

TEST_CASE("Cholesky and spectral routes sample the same joint posterior") {
    const auto pr = simulate(120, 5, 1.5, 12);
    const auto prior = informative_prior(5, 13);
    const auto m = RegressionMoments::from(pr.X, pr.y);
    McmcConfig cfg;
    cfg.n_draws = 30000;
    cfg.burn_in = 1000;
    cfg.seed = 14;
    const auto chol = gibbs_sample(m, prior, cfg);
    cfg.route = SamplerRoute::kSpectral;
    cfg.seed = 15;
    const auto spec = gibbs_sample(m, prior, cfg);
    const auto [m1, c1] = oracle::moments(chol.gamma);
    const auto [m2, c2] = oracle::moments(spec.gamma);
    for (Eigen::Index j = 0; j < 5; ++j) {
        CHECK(std::abs(m1[j] - m2[j]) < 5.0 * std::sqrt(2.0 * c1(j, j) / 29000.0));
    }
    CHECK(frobenius_rel(c2, c1) < 0.05);
    CHECK(spec.sigma2.mean() == doctest::Approx(chol.sigma2.mean()).epsilon(0.02));
}

TEST_CASE("identical inputs and seed give bit-identical draws") {
    const auto pr = simulate(50, 4, 1.0, 16);
    const auto prior = NormalGammaPrior::diffuse(4);
    const auto m = RegressionMoments::from(pr.X, pr.y);
    for (auto route : {SamplerRoute::kCholesky, SamplerRoute::kSpectral}) {
        McmcConfig cfg;
        cfg.n_draws = 500;
        cfg.burn_in = 100;
        cfg.seed = 99;
        cfg.route = route;
        const auto a = gibbs_sample(m, prior, cfg);
        const auto b = gibbs_sample(m, prior, cfg);
        CHECK(a.gamma == b.gamma);
        CHECK(a.sigma2 == b.sigma2);
        cfg.seed = 100;
        CHECK(gibbs_sample(m, prior, cfg).gamma != a.gamma);
        CHECK((a.sigma2.array() > 0.0).all());
    }
}

TEST_CASE("retained draw count honours burn-in and thinning") {
    const auto pr = simulate(40, 2, 1.0, 17);
    McmcConfig cfg;
    cfg.n_draws = 1000;
    cfg.burn_in = 100;
    cfg.thin = 3;
    const auto draws = gibbs_sample(RegressionMoments::from(pr.X, pr.y), NormalGammaPrior::diffuse(2), cfg);
    CHECK(draws.size() == 300);
    CHECK(draws.gamma.rows() == 300);
    cfg.burn_in = 1000;
    CHECK_THROWS_AS(cfg.validate(), SpecError);
}

TEST_CASE("posterior means cover the truth on large simulated samples") {
    int covered = 0;
    int total = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto pr = simulate(5000, 5, 1.0, 1000 + seed);
        McmcConfig cfg;
        cfg.n_draws = 3000;
        cfg.burn_in = 500;
        cfg.seed = seed;
        cfg.route = SamplerRoute::kSpectral;
        const auto draws = gibbs_sample(RegressionMoments::from(pr.X, pr.y), NormalGammaPrior::diffuse(5), cfg);
        const auto [mean, cov] = oracle::moments(draws.gamma);
        for (Eigen::Index j = 0; j < 5; ++j) {
            covered += std::abs(mean[j] - pr.truth[j]) < 3.0 * std::sqrt(cov(j, j));
            ++total;
        }
    }
    CHECK(covered >= static_cast<int>(0.95 * total));
}

TEST_CASE("prior and dimension validation") {
    NormalGammaPrior bad = NormalGammaPrior::diffuse(2);
    bad.gamma_cov(0, 1) = 5.0;
    bad.gamma_cov(1, 0) = 5.0;
    bad.gamma_cov(0, 0) = 1.0;
    bad.gamma_cov(1, 1) = 1.0;
    CHECK_THROWS_AS(bad.validate(2), SpecError);
    NormalGammaPrior neg = NormalGammaPrior::diffuse(2);
    neg.a = 0.0;
    CHECK_THROWS_AS(neg.validate(2), SpecError);
    const auto pr = simulate(20, 3, 1.0, 18);
    CHECK_THROWS_AS(gibbs_sample(RegressionMoments::from(pr.X, pr.y), NormalGammaPrior::diffuse(2), McmcConfig{}),
                    SpecError);
}

TEST_CASE("predictive of a single draw is that Gaussian; mean is the draw average") {
    PosteriorDraws one;
    one.gamma = Eigen::RowVector2d(0.5, -1.0);
    one.sigma2 = Eigen::VectorXd::Constant(1, 2.0);
    const Eigen::Vector2d z(4.0, 1.0);
    const auto pd = posterior_predictive(one, z);
    REQUIRE(pd.size() == 1);
    CHECK(pd.means()[0] == 1.0);
    CHECK(pd.variances()[0] == 2.0);
    CHECK(pd.cdf(1.0) == doctest::Approx(0.5));
    CHECK(pd.quantile(oracle::phi_cdf(1.0)) == doctest::Approx(1.0 + std::sqrt(2.0)).epsilon(1e-9));

    const auto pr = simulate(50, 2, 1.0, 19);
    McmcConfig cfg;
    cfg.n_draws = 600;
    cfg.burn_in = 100;
    const auto draws = gibbs_sample(RegressionMoments::from(pr.X, pr.y), NormalGammaPrior::diffuse(2), cfg);
    const auto mix = posterior_predictive(draws, z);
    CHECK(mix.mean() == doctest::Approx((draws.gamma * z).mean()).epsilon(1e-12));
    CHECK(mix.thinned(100).size() == 100);
    CHECK(mix.thinned(0).size() == 500);
    CHECK_THROWS_AS(posterior_predictive(draws, Eigen::Vector3d(1, 2, 3)), SpecError);
}

TEST_CASE("predictive sampling reproduces mixture moments") {
    const PredictiveDensity pd({-1.0, 2.0}, {0.25, 1.0});
    const auto xs = pd.sample(200000, 5);
    CHECK(oracle::mean(xs) == doctest::Approx(pd.mean()).epsilon(0.01));
    CHECK(pd.variance() == doctest::Approx(0.5 * (0.25 + 1.0) + 0.5 * (1.0 + 4.0) - 0.25));
    CHECK(pd.sample(10, 5) == pd.sample(10, 5));
}

TEST_CASE("derived seeds differ across task coordinates") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t a = 0; a < 20; ++a) {
        for (std::uint64_t b = 0; b < 20; ++b) seen.insert(derive_seed(1, a, b));
    }
    CHECK(seen.size() == 400);
    CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
}

TEST_CASE("draw dump has one header plus one line per draw") {
    PosteriorDraws d;
    d.gamma = Eigen::MatrixXd::Ones(3, 2);
    d.sigma2 = Eigen::VectorXd::Ones(3);
    d.column_names = {"a", "b"};
    std::ostringstream out;
    write_draws_csv(d, out);
    CHECK(out.str() == "a,b,sigma2\n1,1,1\n1,1,1\n1,1,1\n");
}
