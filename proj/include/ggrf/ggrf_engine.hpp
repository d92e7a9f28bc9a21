#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ggrf/data_model.hpp"
#include "ggrf/null_model.hpp"
#include "ggrf/similarity.hpp"
#include "ggrf/weights.hpp"

namespace ggrf {

/// Relative magnitude below which spectrum entries are treated as zero.
inline constexpr double kSpectrumTruncation = 1e-10;

/// gamma_hat = r'Sr / r'S^2 r, the root of r'S(I - gamma S)r = 0.
double estimate_gamma(const Eigen::VectorXd& residuals, const SimilarityMatrix& s);

/// A = S - gamma S^2.
Eigen::MatrixXd test_matrix(const SimilarityMatrix& s, double gamma_obs);

/// Sorts by decreasing magnitude and drops |lambda| < rel * max|lambda|.
Eigen::VectorXd truncate_spectrum(const Eigen::VectorXd& eigenvalues,
                                  double rel = kSpectrumTruncation);

/// Eigenvalues of P^(1/2) A P^(1/2) with P^(1/2) from the spectral
/// decomposition of P. Throws DegenerateError when P has an eigenvalue
/// below -1e-10 (scaled by its largest eigenvalue).
Eigen::VectorXd eigen_spectrum(const ProjectionMatrix& p, const Eigen::MatrixXd& a);

/// Factor Z = (I - VV') W^(1/2) with Z'Z = P, where V is an orthonormal
/// basis of W^(1/2) X. The nonzero eigenvalues of Z A Z' equal those of
/// P^(1/2) A P^(1/2), and Z A Z' costs O(N^2 M) instead of two dense
/// products.
class ProjectionRoot {
public:
    ProjectionRoot(const NullFit& fit, const CovariateMatrix& x);

    /// Z A Z'.
    Eigen::MatrixXd conjugate(const Eigen::MatrixXd& a) const;
    /// Z'Z, i.e. P.
    Eigen::MatrixXd projection() const;

    Eigen::Index size() const noexcept { return sqrt_w_.size(); }

private:
    Eigen::VectorXd sqrt_w_;
    Eigen::MatrixXd basis_;
};

Eigen::VectorXd eigen_spectrum(const ProjectionRoot& root, const Eigen::MatrixXd& a);

/// Genotypes after monomorphic filtering and mean imputation, with the
/// corresponding MAFs and weights.
struct PreparedRegion {
    GenotypeMatrix genotypes;
    std::vector<std::string> dropped;
    Eigen::VectorXd mafs;
    Eigen::VectorXd weights;
    WeightSpec weight_spec;
    Eigen::Index n_input_variants = 0;
};

PreparedRegion prepare_region(const GenotypeMatrix& g, const WeightSpec& wspec);

struct GgrfResult {
    double gamma_hat = 0.0;
    double p_value = 1.0;
    Eigen::VectorXd eigenvalues;
    Eigen::Index n_variants = 0;
    Eigen::Index n_subjects = 0;
    SimilaritySpec similarity_spec;
    WeightSpec weight_spec;

    // diagnostics
    bool p_approximate = false;
    int mixture_fault = 0;
    Eigen::Index n_truncated = 0;
    Link link = Link::identity;
    int null_iterations = 0;
};

/// One region's similarity matrix and its square, reusable across
/// phenotypes (e.g. simulation replicates with fixed genotypes).
class GgrfModel {
public:
    GgrfModel(const PreparedRegion& region, const SimilaritySpec& sspec);
    GgrfModel(SimilarityMatrix s, WeightSpec wspec, Eigen::Index n_variants);

    GgrfResult test(const PhenotypeVector& y, const CovariateMatrix& x) const;
    GgrfResult test(const PhenotypeVector& y, const NullFit& fit, const ProjectionRoot& root) const;

    const SimilarityMatrix& similarity() const noexcept { return s_; }

private:
    double gamma(const Eigen::VectorXd& r) const;

    SimilarityMatrix s_;
    double shift_ = 0.0;
    Eigen::MatrixXd shifted_;
    Eigen::MatrixXd s_squared_;
    WeightSpec wspec_;
    Eigen::Index n_variants_;
};

/// Full pipeline: filter, impute, weight, similarity, null fit, gamma_hat,
/// spectrum and P(sum lambda_k chi2_1 > 0).
GgrfResult ggrf_test(const PhenotypeVector& y, const CovariateMatrix& x, const GenotypeMatrix& g,
                     const WeightSpec& wspec, const SimilaritySpec& sspec);

}  // namespace ggrf
