#include "ggrf/ggrf_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ggrf/chisq_mixture.hpp"
#include "ggrf/error.hpp"

namespace ggrf {

double estimate_gamma(const Eigen::VectorXd& residuals, const SimilarityMatrix& s) {
    if (residuals.size() != s.size()) throw InputError("residual length does not match S");
    if (residuals.squaredNorm() == 0.0) throw DegenerateError("residuals are identically zero");
    const Eigen::VectorXd sr = s.values() * residuals;
    const double denominator = sr.squaredNorm();
    if (!(denominator > 0.0)) throw DegenerateError("S r = 0; gamma is not identifiable");
    const double gamma = residuals.dot(sr) / denominator;
    if (!std::isfinite(gamma)) throw DegenerateError("gamma estimate is not finite");
    return gamma;
}

Eigen::MatrixXd test_matrix(const SimilarityMatrix& s, double gamma_obs) {
    Eigen::MatrixXd a = s.values();
    if (gamma_obs != 0.0) {
        a.noalias() -= gamma_obs * (s.values() * s.values());
    }
    return (0.5 * (a + a.transpose())).eval();
}

Eigen::VectorXd truncate_spectrum(const Eigen::VectorXd& eigenvalues, double rel) {
    std::vector<double> v(eigenvalues.data(), eigenvalues.data() + eigenvalues.size());
    std::sort(v.begin(), v.end(), [](double a, double b) { return std::abs(a) > std::abs(b); });
    if (v.empty()) return {};
    const double cutoff = rel * std::abs(v.front());
    const auto end = std::find_if(v.begin(), v.end(),
                                  [cutoff](double x) { return !(std::abs(x) >= cutoff); });
    const auto kept = static_cast<Eigen::Index>(end - v.begin());
    return Eigen::Map<Eigen::VectorXd>(v.data(), kept);
}

namespace {

Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw Error(ErrorKind::internal, "eigensolver failed");
    return es.eigenvalues();
}

}  // namespace

Eigen::VectorXd eigen_spectrum(const ProjectionMatrix& p, const Eigen::MatrixXd& a) {
    if (p.values.rows() != a.rows() || a.rows() != a.cols()) {
        throw InputError("projection and test matrix dimensions differ");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p.values);
    if (es.info() != Eigen::Success) throw Error(ErrorKind::internal, "eigensolver failed");
    Eigen::VectorXd values = es.eigenvalues();
    const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
    if (values.minCoeff() < -1e-10 * scale) {
        throw DegenerateError("projection matrix is not positive semidefinite (eigenvalue " +
                              std::to_string(values.minCoeff()) + ")");
    }
    values = values.cwiseMax(0.0).cwiseSqrt();
    const Eigen::MatrixXd root = es.eigenvectors() * values.asDiagonal() *
                                 es.eigenvectors().transpose();
    Eigen::MatrixXd m = root * a * root;
    m = (0.5 * (m + m.transpose())).eval();
    return truncate_spectrum(symmetric_eigenvalues(m));
}

ProjectionRoot::ProjectionRoot(const NullFit& fit, const CovariateMatrix& x)
    : sqrt_w_(fit.w_diag.cwiseSqrt()) {
    const Eigen::MatrixXd& design = x.design();
    if (design.rows() != sqrt_w_.size()) throw InputError("fit and covariates differ in length");
    if (!(fit.w_diag.array() > 0.0).all()) {
        throw DegenerateError("variance weights must be positive");
    }
    const Eigen::MatrixXd weighted = sqrt_w_.asDiagonal() * design;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(weighted);
    if (qr.rank() < design.cols()) throw DegenerateError("X'WX is singular");
    basis_ = qr.householderQ() * Eigen::MatrixXd::Identity(design.rows(), design.cols());
}

Eigen::MatrixXd ProjectionRoot::conjugate(const Eigen::MatrixXd& a) const {
    if (a.rows() != size() || a.cols() != size()) throw InputError("matrix size mismatch");
    // B = D A D;  (I - VV') B (I - VV') = B - V C' - C V' + V (V'C) V',  C = B V
    Eigen::MatrixXd b = sqrt_w_.asDiagonal() * a * sqrt_w_.asDiagonal();
    const Eigen::MatrixXd c = b * basis_;
    const Eigen::MatrixXd e = basis_.transpose() * c;
    b.noalias() -= basis_ * c.transpose();
    b.noalias() -= c * basis_.transpose();
    b.noalias() += basis_ * e * basis_.transpose();
    return (0.5 * (b + b.transpose())).eval();
}

Eigen::MatrixXd ProjectionRoot::projection() const {
    Eigen::MatrixXd q = -basis_ * basis_.transpose();
    q.diagonal().array() += 1.0;
    return sqrt_w_.asDiagonal() * q * sqrt_w_.asDiagonal();
}

Eigen::VectorXd eigen_spectrum(const ProjectionRoot& root, const Eigen::MatrixXd& a) {
    return truncate_spectrum(symmetric_eigenvalues(root.conjugate(a)));
}

PreparedRegion prepare_region(const GenotypeMatrix& g, const WeightSpec& wspec) {
    auto filtered = filter_monomorphic(g);
    GenotypeMatrix imputed = impute_missing(filtered.kept);
    Eigen::VectorXd mafs = maf_vector(imputed);
    Eigen::VectorXd weights = compute_weights(mafs, wspec);
    return PreparedRegion{std::move(imputed), std::move(filtered.dropped), std::move(mafs),
                          std::move(weights), wspec, g.n_variants()};
}

GgrfModel::GgrfModel(const PreparedRegion& region, const SimilaritySpec& sspec)
    : GgrfModel(build_similarity(region.genotypes.dosages(), region.weights, sspec),
                region.weight_spec, region.genotypes.n_variants()) {}

GgrfModel::GgrfModel(SimilarityMatrix s, WeightSpec wspec, Eigen::Index n_variants)
    : s_(std::move(s)), wspec_(wspec), n_variants_(n_variants) {
    // The projection annihilates 1 (the design always has an intercept), so
    // S - c11' gives the same spectrum as S. Removing the common level
    // avoids cancellation when S is dominated by a constant block.
    const Eigen::Index n = s_.size();
    shift_ = n > 1 ? s_.values().sum() / static_cast<double>(n * (n - 1)) : 0.0;
    shifted_ = s_.values().array() - shift_;
    s_squared_.noalias() = shifted_ * shifted_;
    s_squared_ = (0.5 * (s_squared_ + s_squared_.transpose())).eval();
}

double GgrfModel::gamma(const Eigen::VectorXd& r) const {
    if (r.size() != s_.size()) throw InputError("residual length does not match S");
    // S r = (S - c11') r + c (1'r) 1, exactly
    const double total = r.sum();
    const Eigen::VectorXd sr = (shifted_ * r).array() + shift_ * total;
    const double denominator = sr.squaredNorm();
    if (!(denominator > 0.0)) throw DegenerateError("S r = 0; gamma is not identifiable");
    const double gamma = r.dot(sr) / denominator;
    if (!std::isfinite(gamma)) throw DegenerateError("gamma estimate is not finite");
    return gamma;
}

GgrfResult GgrfModel::test(const PhenotypeVector& y, const CovariateMatrix& x) const {
    const NullFit fit = fit_null(y, x);
    return test(y, fit, ProjectionRoot(fit, x));
}

GgrfResult GgrfModel::test(const PhenotypeVector& y, const NullFit& fit,
                           const ProjectionRoot& root) const {
    if (y.size() != s_.size()) throw InputError("phenotype length does not match similarity size");
    const Eigen::VectorXd r = fit.response_residuals;
    if (r.norm() <= 1e-10 * std::max(1.0, y.values().norm())) {
        throw DegenerateError("null model fits the phenotype exactly; residuals are zero");
    }

    GgrfResult result;
    result.gamma_hat = gamma(r);
    Eigen::MatrixXd a = shifted_ - result.gamma_hat * s_squared_;
    const Eigen::VectorXd full = symmetric_eigenvalues(root.conjugate(a));
    result.eigenvalues = truncate_spectrum(full);
    result.n_truncated = full.size() - result.eigenvalues.size();
    if (result.eigenvalues.size() == 0) throw DegenerateError("test matrix spectrum is empty");

    MixtureQuery query;
    query.lambdas.assign(result.eigenvalues.data(),
                         result.eigenvalues.data() + result.eigenvalues.size());
    query.threshold_q = 0.0;
    const MixtureResult mixture = mixture_sf_detail(query);
    result.p_value = mixture.p_value;
    result.p_approximate = mixture.approximate;
    result.mixture_fault = mixture.fault;
    result.n_variants = n_variants_;
    result.n_subjects = y.size();
    result.similarity_spec = s_.spec();
    result.weight_spec = wspec_;
    result.link = fit.link;
    result.null_iterations = fit.iterations;
    return result;
}

GgrfResult ggrf_test(const PhenotypeVector& y, const CovariateMatrix& x, const GenotypeMatrix& g,
                     const WeightSpec& wspec, const SimilaritySpec& sspec) {
    if (y.size() != g.n_subjects() || x.n_subjects() != g.n_subjects()) {
        throw InputError("phenotype, covariates and genotypes differ in subject count");
    }
    const PreparedRegion region = prepare_region(g, wspec);
    return GgrfModel(region, sspec).test(y, x);
}

}  // namespace ggrf
