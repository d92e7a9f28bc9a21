#include "ggrf/comparators.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "ggrf/chisq_mixture.hpp"
#include "ggrf/error.hpp"

namespace ggrf {

std::string to_string(KernelKind kind) { return kind == KernelKind::ibs ? "ibs" : "linear"; }

KernelKind parse_kernel_kind(const std::string& name) {
    std::string key = name;
    for (auto& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (key == "linear") return KernelKind::linear;
    if (key == "ibs") return KernelKind::ibs;
    throw InputError("unknown kernel '" + name + "' (expected linear|ibs)");
}

std::string to_string(ComparatorMethod method) {
    return method == ComparatorMethod::burden ? "burden" : "skat";
}

KernelMatrix build_kernel(const Eigen::MatrixXd& dosages, const Eigen::VectorXd& weights,
                          KernelKind kind) {
    if (weights.size() != dosages.cols()) throw InputError("weight length does not match variants");
    if ((weights.array() < 0.0).any() || !weights.allFinite()) {
        throw InputError("weights must be finite and nonnegative");
    }
    if (!(weights.sum() > 0.0)) throw DegenerateError("weights sum to zero");
    if (!dosages.allFinite()) throw InputError("kernel requires complete dosages");

    KernelMatrix k;
    k.kind = kind;
    if (kind == KernelKind::linear) {
        const Eigen::MatrixXd scaled = dosages * weights.cwiseSqrt().asDiagonal();
        k.values.noalias() = scaled * scaled.transpose();
        return k;
    }
    const Eigen::Index n = dosages.rows();
    const Eigen::MatrixXd gt = dosages.transpose();
    const double top = 2.0 * weights.sum();
    k.values.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        k.values(i, i) = top;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d = weights.dot((gt.col(i) - gt.col(j)).cwiseAbs());
            k.values(i, j) = top - d;
            k.values(j, i) = top - d;
        }
    }
    return k;
}

ComparatorResult kernel_score_test(const PhenotypeVector& y, const NullFit& fit,
                                   const ProjectionRoot& root, const KernelMatrix& kernel) {
    if (kernel.values.rows() != y.size()) throw InputError("kernel size does not match phenotype");
    const Eigen::VectorXd r = fit.response_residuals;
    const double scale = fit.link == Link::identity ? fit.residual_variance : 1.0;
    if (!(scale > 0.0)) throw DegenerateError("residual variance is zero");

    ComparatorResult result;
    result.method = ComparatorMethod::kernel_score;
    result.statistic = r.dot(kernel.values * r) / scale;
    if (!(std::abs(result.statistic) > 0.0)) {
        throw DegenerateError("kernel score statistic is zero");
    }
    const Eigen::VectorXd lambdas = eigen_spectrum(root, kernel.values);
    if (lambdas.size() == 0) throw DegenerateError("kernel spectrum is empty");
    MixtureQuery query;
    query.lambdas.assign(lambdas.data(), lambdas.data() + lambdas.size());
    query.threshold_q = result.statistic;
    const MixtureResult mixture = mixture_sf_detail(query);
    result.p_value = mixture.p_value;
    std::ostringstream detail;
    detail << "kernel=" << to_string(kernel.kind) << ";n_lambda=" << lambdas.size()
           << ";approximate=" << (mixture.approximate ? 1 : 0);
    result.detail = detail.str();
    return result;
}

ComparatorResult kernel_score_test(const PhenotypeVector& y, const CovariateMatrix& x,
                                   const GenotypeMatrix& g, const Eigen::VectorXd& weights,
                                   KernelKind kind) {
    if (g.n_subjects() != y.size()) throw InputError("genotype and phenotype sizes differ");
    const KernelMatrix kernel = build_kernel(g.dosages(), weights, kind);
    const NullFit fit = fit_null(y, x);
    return kernel_score_test(y, fit, ProjectionRoot(fit, x), kernel);
}

ComparatorResult burden_test(const PhenotypeVector& y, const CovariateMatrix& x,
                             const Eigen::VectorXd& burden_score) {
    if (burden_score.size() != y.size() || x.n_subjects() != y.size()) {
        throw InputError("burden score, covariates and phenotype differ in length");
    }
    const Eigen::MatrixXd& base = x.design();
    Eigen::MatrixXd design(base.rows(), base.cols() + 1);
    design << base, burden_score;
    const Eigen::Index last = design.cols() - 1;

    ComparatorResult result;
    result.method = ComparatorMethod::burden;
    std::ostringstream detail;
    if (y.kind() == PhenotypeKind::quantitative) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
        if (qr.rank() < design.cols()) {
            throw DegenerateError("burden score is collinear with the covariates");
        }
        const Eigen::VectorXd beta = qr.solve(y.values());
        const double df = static_cast<double>(design.rows() - design.cols());
        if (df < 1.0) throw DegenerateError("no residual degrees of freedom for the burden test");
        const double sigma2 = (y.values() - design * beta).squaredNorm() / df;
        const Eigen::MatrixXd xtx = design.transpose() * design;
        const double var = sigma2 * xtx.ldlt().solve(Eigen::MatrixXd::Identity(xtx.rows(),
                                                                                xtx.cols()))(last, last);
        if (!(var > 0.0)) throw DegenerateError("burden coefficient variance is zero");
        const double t = beta[last] / std::sqrt(var);
        result.statistic = t * t;
        const boost::math::students_t dist(df);
        result.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
        detail << "beta=" << beta[last] << ";se=" << std::sqrt(var) << ";df=" << df;
    } else {
        const NullFit fit = fit_logistic_design(y.values(), design);
        const Eigen::MatrixXd info = design.transpose() * fit.w_diag.asDiagonal() * design;
        const double var = info.ldlt().solve(Eigen::MatrixXd::Identity(info.rows(),
                                                                       info.cols()))(last, last);
        if (!(var > 0.0)) throw DegenerateError("burden coefficient variance is zero");
        const double z = fit.beta_hat[last] / std::sqrt(var);
        result.statistic = z * z;
        const boost::math::normal_distribution<double> normal;
        result.p_value = 2.0 * boost::math::cdf(boost::math::complement(normal, std::abs(z)));
        detail << "beta=" << fit.beta_hat[last] << ";se=" << std::sqrt(var)
               << ";iterations=" << fit.iterations;
    }
    result.p_value = std::clamp(result.p_value, 0.0, 1.0);
    result.detail = detail.str();
    return result;
}

ComparatorResult burden_test(const PhenotypeVector& y, const CovariateMatrix& x,
                             const GenotypeMatrix& g, const Eigen::VectorXd& weights) {
    if (weights.size() != g.n_variants()) throw InputError("weight length does not match variants");
    if (!g.dosages().allFinite()) throw InputError("burden test requires complete dosages");
    return burden_test(y, x, Eigen::VectorXd(g.dosages() * weights));
}

}  // namespace ggrf
