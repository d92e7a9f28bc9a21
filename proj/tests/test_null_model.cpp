#include <doctest.h>

#include "ggrf/error.hpp"
#include "ggrf/ggrf_engine.hpp"
#include "ggrf/null_model.hpp"
#include "helpers.hpp"

using namespace ggrf;

namespace {

Eigen::MatrixXd design_with(const Eigen::MatrixXd& x) {
    Eigen::MatrixXd d(x.rows(), x.cols() + 1);
    d << Eigen::VectorXd::Ones(x.rows()), x;
    return d;
}

// Reference P built from the textbook formula with explicit inverses.
Eigen::MatrixXd reference_projection(const Eigen::VectorXd& w, const Eigen::MatrixXd& design) {
    const Eigen::MatrixXd wm = w.asDiagonal();
    const Eigen::MatrixXd xtwx = design.transpose() * wm * design;
    return wm - wm * design * xtwx.inverse() * design.transpose() * wm;
}

CovariateMatrix random_covariates(Eigen::Index n, Eigen::Index m, std::mt19937_64& rng) {
    Eigen::MatrixXd v(n, m);
    for (Eigen::Index c = 0; c < m; ++c) v.col(c) = testing::normal_vector(n, rng);
    return CovariateMatrix(v, testing::ids("x", m));
}

PhenotypeVector random_binary(const CovariateMatrix& x, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u;
    Eigen::VectorXd y(x.n_subjects());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double eta = -0.5 + 0.4 * x.values().row(i).sum();
        y[i] = u(rng) < 1.0 / (1.0 + std::exp(-eta)) ? 1.0 : 0.0;
    }
    return PhenotypeVector(y, PhenotypeKind::binary);
}

}  // namespace

TEST_SUITE("null_model") {

TEST_CASE("linear: intercept only gives the sample mean") {
    const PhenotypeVector y(Eigen::Vector3d(1, 2, 3), PhenotypeKind::quantitative);
    const auto fit = fit_null_linear(y, CovariateMatrix::intercept_only(3));
    CHECK(fit.mu_hat.isApprox(Eigen::Vector3d::Constant(2.0), 1e-14));
    CHECK(fit.w_diag.isOnes());
    CHECK(fit.converged);
    CHECK(fit.link == Link::identity);
    CHECK(fit.residual_variance == doctest::Approx(1.0));
}

TEST_CASE("linear: exact fit leaves zero residuals") {
    const Eigen::Vector4d x(1, 2, 3, 5);
    const PhenotypeVector y((3.0 * x.array() - 1.0).matrix(), PhenotypeKind::quantitative);
    const auto fit = fit_null_linear(y, CovariateMatrix(x, {"x"}));
    CHECK(fit.response_residuals.cwiseAbs().maxCoeff() < 1e-12);
    CHECK(fit.beta_hat[0] == doctest::Approx(-1.0));
    CHECK(fit.beta_hat[1] == doctest::Approx(3.0));
}

TEST_CASE("linear: residuals survive a large offset") {
    std::mt19937_64 rng(44);
    const Eigen::VectorXd c = testing::normal_vector(200, rng);
    const Eigen::VectorXd y = testing::normal_vector(200, rng) + 0.5 * c;
    const CovariateMatrix x(c, {"c"});
    const auto base = fit_null_linear(PhenotypeVector(y, PhenotypeKind::quantitative), x);
    const PhenotypeVector shifted((y.array() + 1e6).matrix(), PhenotypeKind::quantitative);
    const auto fit = fit_null_linear(shifted, x);
    // only the rounding of y + 1e6 itself remains
    CHECK((fit.response_residuals - base.response_residuals).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(std::abs(fit.response_residuals.sum()) < 1e-9);
    CHECK(fit.beta_hat[0] == doctest::Approx(base.beta_hat[0] + 1e6).epsilon(1e-12));
}

TEST_CASE("linear: binary covariate gives group means") {
    const PhenotypeVector y(Eigen::Vector4d(0, 0, 1, 1), PhenotypeKind::quantitative);
    const auto fit = fit_null_linear(y, CovariateMatrix(Eigen::Vector4d(0, 0, 1, 1), {"g"}));
    CHECK(fit.mu_hat.isApprox(Eigen::Vector4d(0, 0, 1, 1), 1e-14));
    const PhenotypeVector y2(Eigen::Vector4d(1, 3, 4, 8), PhenotypeKind::quantitative);
    const auto fit2 = fit_null_linear(y2, CovariateMatrix(Eigen::Vector4d(0, 0, 1, 1), {"g"}));
    CHECK(fit2.mu_hat.isApprox(Eigen::Vector4d(2, 2, 6, 6), 1e-14));
}

TEST_CASE("logistic: intercept only, case fraction 1/3") {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(9);
    v.head(3).setOnes();
    const PhenotypeVector y(v, PhenotypeKind::binary);
    const auto fit = fit_null_logistic(y, CovariateMatrix::intercept_only(9));
    CHECK(fit.converged);
    CHECK(fit.beta_hat[0] == doctest::Approx(std::log(0.5)).epsilon(1e-10));
    for (Eigen::Index i = 0; i < 9; ++i) {
        CHECK(fit.mu_hat[i] == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
        CHECK(fit.w_diag[i] == doctest::Approx(2.0 / 9.0).epsilon(1e-10));
    }
}

TEST_CASE("logistic: intercept only, balanced classes") {
    const PhenotypeVector y(Eigen::Vector4d(1, 0, 0, 1), PhenotypeKind::binary);
    const auto fit = fit_null_logistic(y, CovariateMatrix::intercept_only(4));
    CHECK(std::abs(fit.beta_hat[0]) < 1e-12);
    CHECK(fit.w_diag.isApprox(Eigen::Vector4d::Constant(0.25), 1e-12));
}

TEST_CASE("logistic: perfectly predicting covariate is separation") {
    const PhenotypeVector y(Eigen::VectorXd::LinSpaced(6, 0, 5).unaryExpr([](double v) {
        return v < 3 ? 0.0 : 1.0;
    }),
                            PhenotypeKind::binary);
    const CovariateMatrix x(Eigen::VectorXd::LinSpaced(6, 0, 5), {"x"});
    try {
        fit_null_logistic(y, x);
        FAIL("expected separation");
    } catch (const DegenerateError& e) {
        CHECK(std::string(e.what()).find("separation") != std::string::npos);
    }
}

TEST_CASE("logistic: fitted means reproduce the case fraction and W = mu(1-mu)") {
    std::mt19937_64 rng(21);
    for (int rep = 0; rep < 5; ++rep) {
        const auto x = random_covariates(200, 2, rng);
        const auto y = random_binary(x, rng);
        const auto fit = fit_null_logistic(y, x);
        CHECK(fit.converged);
        CHECK(fit.iterations <= 50);
        CHECK(fit.mu_hat.mean() == doctest::Approx(y.values().mean()).epsilon(1e-8));
        CHECK((fit.mu_hat.array() > 0.0).all());
        CHECK((fit.mu_hat.array() < 1.0).all());
        const Eigen::VectorXd w = (fit.mu_hat.array() * (1.0 - fit.mu_hat.array())).matrix();
        CHECK(fit.w_diag.isApprox(w, 1e-15));
        CHECK(fit.w_diag.maxCoeff() <= 0.25);
        // score equations X'(y - mu) = 0
        const Eigen::VectorXd score = x.design().transpose() * fit.response_residuals;
        CHECK(score.cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("projection: intercept-only identity link is the centering matrix") {
    const Eigen::Index n = 5;
    const PhenotypeVector y(Eigen::VectorXd::LinSpaced(n, 0, 4), PhenotypeKind::quantitative);
    const auto x = CovariateMatrix::intercept_only(n);
    const auto p = projection_matrix(fit_null_linear(y, x), x);
    const Eigen::MatrixXd c =
        Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / n);
    CHECK(p.values.isApprox(c, 1e-14));
    CHECK((p.values * p.values).isApprox(p.values, 1e-14));
}

TEST_CASE("projection: annihilates the design, matches the formula, PSD") {
    std::mt19937_64 rng(4);
    for (int rep = 0; rep < 4; ++rep) {
        const auto x = random_covariates(60, 3, rng);
        const NullFit fit = rep % 2 ? fit_null_logistic(random_binary(x, rng), x)
                                    : fit_null_linear(PhenotypeVector(testing::normal_vector(60, rng),
                                                                      PhenotypeKind::quantitative),
                                                      x);
        const auto p = projection_matrix(fit, x);
        CHECK((p.values * x.design()).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(p.values.isApprox(reference_projection(fit.w_diag, x.design()), 1e-10));
        CHECK((p.values - p.values.transpose()).cwiseAbs().maxCoeff() == 0.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p.values);
        CHECK(es.eigenvalues().minCoeff() >= -1e-10);
        // trace(P) = sum(w) - trace(hat correction), which for W = I is N - (M + 1)
        const Eigen::MatrixXd wm = fit.w_diag.asDiagonal();
        const Eigen::MatrixXd d = x.design();
        const double correction =
            (wm * d * (d.transpose() * wm * d).inverse() * d.transpose() * wm).trace();
        CHECK(p.values.trace() <= fit.w_diag.sum());
        CHECK(p.values.trace() ==
              doctest::Approx(fit.w_diag.sum() - correction).epsilon(1e-8));
        if (fit.link == Link::identity) CHECK(p.values.trace() == doctest::Approx(60.0 - 4.0));

        const ProjectionRoot root(fit, x);
        CHECK(root.projection().isApprox(p.values, 1e-10));
    }
}

TEST_CASE("projection annihilates constant shifts of Y") {
    std::mt19937_64 rng(5);
    const auto x = random_covariates(30, 1, rng);
    const Eigen::VectorXd y = testing::normal_vector(30, rng);
    const auto fit = fit_null_linear(PhenotypeVector(y, PhenotypeKind::quantitative), x);
    const auto p = projection_matrix(fit, x);
    const Eigen::VectorXd shifted = (y.array() + 4.2).matrix();
    CHECK((p.values * shifted - p.values * y).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("fit_null dispatches on the phenotype kind") {
    const PhenotypeVector q(Eigen::Vector4d(0.3, 1.2, -0.4, 2.0), PhenotypeKind::quantitative);
    const PhenotypeVector b(Eigen::Vector4d(0, 1, 1, 0), PhenotypeKind::binary);
    const auto x = CovariateMatrix::intercept_only(4);
    CHECK(fit_null(q, x).link == Link::identity);
    CHECK(fit_null(b, x).link == Link::logit);
    CHECK_THROWS_AS(fit_null_logistic(q, x), InputError);
}

}
