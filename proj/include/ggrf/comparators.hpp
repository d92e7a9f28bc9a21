#pragma once

#include <string>

#include <Eigen/Dense>

#include "ggrf/data_model.hpp"
#include "ggrf/ggrf_engine.hpp"
#include "ggrf/null_model.hpp"

namespace ggrf {

enum class KernelKind { linear, ibs };

std::string to_string(KernelKind kind);
KernelKind parse_kernel_kind(const std::string& name);

struct KernelMatrix {
    Eigen::MatrixXd values;
    KernelKind kind = KernelKind::linear;
};

/// linear: G diag(w) G';  ibs: K_ij = sum_k w_k (2 - |g_ik - g_jk|), diagonal
/// included. Dosages must be complete.
KernelMatrix build_kernel(const Eigen::MatrixXd& dosages, const Eigen::VectorXd& weights,
                          KernelKind kind);

enum class ComparatorMethod { burden, kernel_score };

std::string to_string(ComparatorMethod method);

struct ComparatorResult {
    ComparatorMethod method = ComparatorMethod::burden;
    double statistic = 0.0;
    double p_value = 1.0;
    std::string detail;
};

/// Score statistic Q = r'Kr (scaled by the residual variance for
/// quantitative phenotypes) referred to the mixture with weights from
/// P^(1/2) K P^(1/2). No small-sample adjustment.
ComparatorResult kernel_score_test(const PhenotypeVector& y, const CovariateMatrix& x,
                                   const GenotypeMatrix& g, const Eigen::VectorXd& weights,
                                   KernelKind kind);
ComparatorResult kernel_score_test(const PhenotypeVector& y, const NullFit& fit,
                                   const ProjectionRoot& root, const KernelMatrix& kernel);

/// Wald test of the weighted burden score b = G w added to the covariates
/// (linear model for quantitative, logistic for binary phenotypes).
ComparatorResult burden_test(const PhenotypeVector& y, const CovariateMatrix& x,
                             const GenotypeMatrix& g, const Eigen::VectorXd& weights);
ComparatorResult burden_test(const PhenotypeVector& y, const CovariateMatrix& x,
                             const Eigen::VectorXd& burden_score);

}  // namespace ggrf
