#include "ggrf/null_model.hpp"

#include <cmath>

#include "ggrf/error.hpp"

namespace ggrf {

std::string to_string(Link link) { return link == Link::logit ? "logit" : "identity"; }

NullFit fit_null_linear(const PhenotypeVector& y, const CovariateMatrix& x) {
    if (y.size() != x.n_subjects()) throw InputError("phenotype and covariate lengths differ");
    const Eigen::MatrixXd& design = x.design();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < design.cols()) throw DegenerateError("singular design matrix");

    NullFit fit;
    fit.link = Link::identity;
    // Solving for the centered response keeps residuals accurate when the
    // mean dominates the spread; the intercept absorbs the mean afterwards.
    const double mean = y.values().mean();
    const Eigen::VectorXd centered = (y.values().array() - mean).matrix();
    fit.beta_hat = qr.solve(centered);
    fit.response_residuals = centered - design * fit.beta_hat;
    fit.beta_hat[0] += mean;
    fit.mu_hat = y.values() - fit.response_residuals;
    fit.w_diag = Eigen::VectorXd::Ones(y.size());
    fit.converged = true;
    fit.iterations = 1;
    const double rss = fit.response_residuals.squaredNorm();
    fit.deviance = rss;
    const auto df = static_cast<double>(y.size() - design.cols());
    fit.residual_variance = df > 0 ? rss / df : 0.0;
    return fit;
}

namespace {

double logistic(double eta) {
    if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
    const double e = std::exp(eta);
    return e / (1.0 + e);
}

double binomial_deviance(const Eigen::VectorXd& y, const Eigen::VectorXd& mu) {
    double dev = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        dev -= 2.0 * (y[i] > 0.5 ? std::log(mu[i]) : std::log1p(-mu[i]));
    }
    return dev;
}

}  // namespace

NullFit fit_logistic_design(const Eigen::VectorXd& y, const Eigen::MatrixXd& design,
                            const IrlsOptions& options) {
    const Eigen::Index n = design.rows();
    const Eigen::Index p = design.cols();
    {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
        if (qr.rank() < p) throw DegenerateError("singular design matrix");
    }

    // start from the intercept-only solution when column 0 is the intercept
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    const double ybar = y.mean();
    if ((design.col(0).array() == 1.0).all() && ybar > 0.0 && ybar < 1.0) {
        beta[0] = std::log(ybar / (1.0 - ybar));
    }

    NullFit fit;
    fit.link = Link::logit;
    Eigen::VectorXd eta = design * beta;
    Eigen::VectorXd mu(n);
    Eigen::VectorXd w(n);
    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        for (Eigen::Index i = 0; i < n; ++i) {
            mu[i] = logistic(eta[i]);
            w[i] = mu[i] * (1.0 - mu[i]);
        }
        // Newton step: (X'WX) delta = X'(y - mu)
        const Eigen::MatrixXd xtwx = design.transpose() * w.asDiagonal() * design;
        const Eigen::VectorXd score = design.transpose() * (y - mu);
        Eigen::LDLT<Eigen::MatrixXd> ldlt(xtwx);
        if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array() > 0.0).all()) {
            throw DegenerateError("logistic fit: information matrix became singular "
                                  "(complete separation?)");
        }
        const Eigen::VectorXd delta = ldlt.solve(score);
        beta += delta;
        eta = design * beta;
        fit.iterations = iter;
        if (!beta.allFinite() || beta.cwiseAbs().maxCoeff() > options.separation_bound) {
            throw DegenerateError("logistic fit: complete separation (|coefficient| > " +
                                  std::to_string(options.separation_bound) + ")");
        }
        if (delta.cwiseAbs().maxCoeff() < options.tolerance) {
            fit.converged = true;
            break;
        }
    }
    if (!fit.converged) {
        throw DegenerateError("logistic fit did not converge in " +
                              std::to_string(fit.iterations) + " iterations");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        mu[i] = logistic(eta[i]);
        w[i] = mu[i] * (1.0 - mu[i]);
    }
    fit.beta_hat = beta;
    fit.mu_hat = mu;
    fit.response_residuals = y - mu;
    fit.w_diag = w;
    fit.deviance = binomial_deviance(y, mu);
    fit.residual_variance = 1.0;
    return fit;
}

NullFit fit_null_logistic(const PhenotypeVector& y, const CovariateMatrix& x,
                          const IrlsOptions& options) {
    if (y.kind() != PhenotypeKind::binary) {
        throw InputError("logistic null model needs a binary phenotype");
    }
    if (y.size() != x.n_subjects()) throw InputError("phenotype and covariate lengths differ");
    return fit_logistic_design(y.values(), x.design(), options);
}

NullFit fit_null(const PhenotypeVector& y, const CovariateMatrix& x) {
    return y.kind() == PhenotypeKind::binary ? fit_null_logistic(y, x) : fit_null_linear(y, x);
}

ProjectionMatrix projection_matrix(const NullFit& fit, const CovariateMatrix& x) {
    const Eigen::MatrixXd& design = x.design();
    if (design.rows() != fit.w_diag.size()) throw InputError("fit and covariates differ in length");
    const Eigen::MatrixXd wx = fit.w_diag.asDiagonal() * design;
    const Eigen::MatrixXd xtwx = design.transpose() * wx;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xtwx);
    if (qr.rank() < xtwx.cols()) throw DegenerateError("X'WX is singular");
    ProjectionMatrix p;
    p.values = -wx * qr.solve(wx.transpose());
    p.values.diagonal() += fit.w_diag;
    // exact symmetry
    p.values = (0.5 * (p.values + p.values.transpose())).eval();
    return p;
}

}  // namespace ggrf
