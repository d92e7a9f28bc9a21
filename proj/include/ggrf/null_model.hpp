#pragma once

#include <string>

#include <Eigen/Dense>

#include "ggrf/data_model.hpp"

namespace ggrf {

enum class Link { identity, logit };

std::string to_string(Link link);

/// Fit of the covariate-only mean model mu = f(X b).
struct NullFit {
    Eigen::VectorXd mu_hat;
    Eigen::VectorXd beta_hat;  // intercept first
    Link link = Link::identity;
    Eigen::VectorXd w_diag;    // 1 (identity) or mu (1 - mu) (logit)
    bool converged = false;
    int iterations = 0;
    double deviance = 0.0;
    /// Residual sum of squares / (N - M - 1); identity link only.
    double residual_variance = 1.0;

    /// y - mu_hat, computed at fit time without cancellation against the mean.
    Eigen::VectorXd response_residuals;
};

struct IrlsOptions {
    double tolerance = 1e-8;
    int max_iterations = 50;
    double separation_bound = 30.0;
};

/// Ordinary least squares on [1 | X].
NullFit fit_null_linear(const PhenotypeVector& y, const CovariateMatrix& x);

/// Logistic regression by iteratively reweighted least squares.
/// Throws DegenerateError on complete separation (|b_j| beyond the bound)
/// or when IRLS does not converge.
NullFit fit_null_logistic(const PhenotypeVector& y, const CovariateMatrix& x,
                          const IrlsOptions& options = {});

/// Dispatches on the phenotype kind.
NullFit fit_null(const PhenotypeVector& y, const CovariateMatrix& x);

/// P = W - W X (X'WX)^-1 X'W for the design [1 | X].
struct ProjectionMatrix {
    Eigen::MatrixXd values;
};

ProjectionMatrix projection_matrix(const NullFit& fit, const CovariateMatrix& x);

/// Logistic regression on an arbitrary design matrix (no intercept added).
/// Shared by the null model and the burden comparator.
NullFit fit_logistic_design(const Eigen::VectorXd& y, const Eigen::MatrixXd& design,
                            const IrlsOptions& options = {});

}  // namespace ggrf
