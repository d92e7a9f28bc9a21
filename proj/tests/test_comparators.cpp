#include <doctest.h>

#include <boost/math/distributions/students_t.hpp>

#include "ggrf/comparators.hpp"
#include "ggrf/error.hpp"
#include "helpers.hpp"

using namespace ggrf;

namespace {

PhenotypeVector normal_phenotype(Eigen::Index n, std::mt19937_64& rng) {
    return PhenotypeVector(testing::normal_vector(n, rng), PhenotypeKind::quantitative);
}

}  // namespace

TEST_SUITE("comparators") {

TEST_CASE("linear kernel of one variant is the outer product") {
    const Eigen::Vector3d d(0, 1, 2);
    const auto k = build_kernel(d, Eigen::VectorXd::Ones(1), KernelKind::linear);
    CHECK(k.values.isApprox(d * d.transpose(), 1e-15));
    CHECK(k.kind == KernelKind::linear);
}

TEST_CASE("kernels are PSD Gram matrices") {
    std::mt19937_64 rng(50);
    for (int rep = 0; rep < 5; ++rep) {
        const Eigen::MatrixXd d = testing::random_dosages(40, 8, rng);
        const Eigen::VectorXd w = Eigen::VectorXd::Random(8).cwiseAbs();
        for (auto kind : {KernelKind::linear, KernelKind::ibs}) {
            const auto k = build_kernel(d, w, kind);
            CHECK((k.values - k.values.transpose()).cwiseAbs().maxCoeff() < 1e-12);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k.values);
            CHECK(es.eigenvalues().minCoeff() >= -1e-10 * es.eigenvalues().maxCoeff());
        }
    }
    CHECK_THROWS_AS(build_kernel(Eigen::Matrix2d::Ones(), Eigen::Vector2d::Zero(), KernelKind::ibs),
                    DegenerateError);
}

TEST_CASE("kernel score: zero kernel is degenerate") {
    std::mt19937_64 rng(51);
    const auto y = normal_phenotype(20, rng);
    const auto x = CovariateMatrix::intercept_only(20);
    const NullFit fit = fit_null(y, x);
    const ProjectionRoot root(fit, x);
    CHECK_THROWS_AS(kernel_score_test(y, fit, root, KernelMatrix{Eigen::MatrixXd::Zero(20, 20)}),
                    DegenerateError);
}

TEST_CASE("kernel score: statistic is r'Kr scaled by the residual variance") {
    std::mt19937_64 rng(52);
    const auto g = testing::make_genotypes(testing::random_dosages(50, 6, rng));
    const auto y = normal_phenotype(50, rng);
    const auto x = CovariateMatrix::intercept_only(50);
    const Eigen::VectorXd w = Eigen::VectorXd::Ones(6);
    const auto r = kernel_score_test(y, x, g, w, KernelKind::linear);
    const Eigen::VectorXd res = (y.values().array() - y.values().mean()).matrix();
    const Eigen::MatrixXd k = build_kernel(g.dosages(), w, KernelKind::linear).values;
    const double sigma2 = res.squaredNorm() / 49.0;
    CHECK(r.statistic == doctest::Approx(res.dot(k * res) / sigma2).epsilon(1e-12));
    CHECK(r.method == ComparatorMethod::kernel_score);
    CHECK(r.p_value >= 0.0);
    CHECK(r.p_value <= 1.0);
    CHECK(r.detail.find("kernel=linear") != std::string::npos);
}

TEST_CASE("burden with one variant reduces to the single-variant regression t test") {
    std::mt19937_64 rng(53);
    const Eigen::MatrixXd d = testing::random_dosages(60, 1, rng);
    const auto g = testing::make_genotypes(d);
    Eigen::VectorXd y = testing::normal_vector(60, rng) + 0.4 * d.col(0);
    const auto r = burden_test(PhenotypeVector(y, PhenotypeKind::quantitative),
                               CovariateMatrix::intercept_only(60), g, Eigen::VectorXd::Ones(1));
    // textbook simple linear regression
    const Eigen::VectorXd xc = (d.col(0).array() - d.col(0).mean()).matrix();
    const Eigen::VectorXd yc = (y.array() - y.mean()).matrix();
    const double slope = xc.dot(yc) / xc.squaredNorm();
    const double rss = (yc - slope * xc).squaredNorm();
    const double se = std::sqrt(rss / 58.0 / xc.squaredNorm());
    const double t = slope / se;
    const double p = 2.0 * boost::math::cdf(boost::math::complement(
                               boost::math::students_t(58.0), std::abs(t)));
    CHECK(r.statistic == doctest::Approx(t * t).epsilon(1e-10));
    CHECK(r.p_value == doctest::Approx(p).epsilon(1e-10));
    CHECK(r.method == ComparatorMethod::burden);
}

TEST_CASE("burden: binary phenotypes use the logistic Wald test") {
    std::mt19937_64 rng(54);
    const Eigen::MatrixXd d = testing::random_dosages(300, 4, rng);
    const auto g = testing::make_genotypes(d);
    std::uniform_real_distribution<double> u;
    Eigen::VectorXd y(300);
    for (Eigen::Index i = 0; i < 300; ++i) {
        y[i] = u(rng) < 1.0 / (1.0 + std::exp(0.7 - 0.5 * d.row(i).sum())) ? 1.0 : 0.0;
    }
    const auto r = burden_test(PhenotypeVector(y, PhenotypeKind::binary),
                               CovariateMatrix::intercept_only(300), g, Eigen::VectorXd::Ones(4));
    CHECK(r.p_value < 0.05);
    CHECK(r.statistic > 0.0);
}

TEST_CASE("burden: degenerate scores") {
    std::mt19937_64 rng(55);
    const auto y = normal_phenotype(10, rng);
    const auto x = CovariateMatrix::intercept_only(10);
    CHECK_THROWS_AS(burden_test(y, x, Eigen::VectorXd::Zero(10)), DegenerateError);
    CHECK_THROWS_AS(burden_test(y, x, Eigen::VectorXd::Constant(10, 3.0)), DegenerateError);
    const auto zeros = GenotypeMatrix(Eigen::MatrixXd::Zero(10, 3), testing::ids("S", 10),
                                      testing::ids("V", 3));
    CHECK_THROWS_AS(burden_test(y, x, zeros, Eigen::VectorXd::Ones(3)), DegenerateError);
}

TEST_CASE("null calibration of all three tests on quantitative phenotypes") {
    std::mt19937_64 rng(56);
    const Eigen::Index n = 200;
    const auto g = testing::make_genotypes(testing::random_dosages(n, 15, rng));
    const auto x = CovariateMatrix::intercept_only(n);
    const Eigen::VectorXd w = Eigen::VectorXd::Ones(15);
    const GgrfModel model(prepare_region(g, WeightSpec{}), SimilaritySpec{});
    const auto kernel = build_kernel(g.dosages(), w, KernelKind::ibs);
    const Eigen::VectorXd burden = g.dosages() * w;
    int reject[3] = {0, 0, 0};
    const int reps = 600;
    for (int rep = 0; rep < reps; ++rep) {
        const auto y = normal_phenotype(n, rng);
        const NullFit fit = fit_null(y, x);
        const ProjectionRoot root(fit, x);
        reject[0] += model.test(y, fit, root).p_value <= 0.05;
        reject[1] += kernel_score_test(y, fit, root, kernel).p_value <= 0.05;
        reject[2] += burden_test(y, x, burden).p_value <= 0.05;
    }
    // 0.05 +/- 3.5 SE at 600 replicates
    for (int count : reject) {
        CHECK(count / double(reps) > 0.05 - 0.031);
        CHECK(count / double(reps) < 0.05 + 0.031);
    }
}

TEST_CASE("method names") {
    CHECK(to_string(ComparatorMethod::kernel_score) == "skat");
    CHECK(to_string(ComparatorMethod::burden) == "burden");
    CHECK(parse_kernel_kind("IBS") == KernelKind::ibs);
    CHECK_THROWS_AS(parse_kernel_kind("gaussian"), InputError);
}

}
