#pragma once

#include <iosfwd>
#include <string>

#include <Eigen/Dense>

#include "ggrf/data_model.hpp"

namespace ggrf {

/// p-norm distance-based similarity of order 1..4 (D1S..D4S), optionally
/// double-centered.
struct SimilaritySpec {
    int p_order = 1;
    bool centered = false;

    void validate() const;
    /// "D1S", "D2S-centered", ...
    std::string name() const;
};

SimilaritySpec parse_similarity(const std::string& name);

class SimilarityMatrix {
public:
    SimilarityMatrix(Eigen::MatrixXd values, SimilaritySpec spec, double supremum_b);

    const Eigen::MatrixXd& values() const noexcept { return values_; }
    const SimilaritySpec& spec() const noexcept { return spec_; }
    double supremum_b() const noexcept { return supremum_b_; }
    Eigen::Index size() const noexcept { return values_.rows(); }

private:
    Eigen::MatrixXd values_;
    SimilaritySpec spec_;
    double supremum_b_;
};

/// s_ij = B - (sum_k w_k |g_ik - g_jk|^p)^(1/p), B = 2 (sum_k w_k)^(1/p),
/// zero diagonal. Dosages must be complete (no missing) and within [0, 2].
SimilarityMatrix nds_similarity(const Eigen::MatrixXd& dosages, const Eigen::VectorXd& weights,
                                int p_order);
SimilarityMatrix nds_similarity(const GenotypeMatrix& g, const Eigen::VectorXd& weights,
                                int p_order);

/// (I - J) S (I - J) with J = 11'/N, before any diagonal adjustment.
Eigen::MatrixXd double_center(const Eigen::MatrixXd& s);

/// Double-centers an uncentered similarity and zeroes its diagonal.
SimilarityMatrix center_similarity(const SimilarityMatrix& s);

/// nds_similarity followed by centering when spec.centered is set.
SimilarityMatrix build_similarity(const Eigen::MatrixXd& dosages, const Eigen::VectorXd& weights,
                                  const SimilaritySpec& spec);

void write_similarity_tsv(const SimilarityMatrix& s, const std::vector<std::string>& subject_ids,
                          std::ostream& out);

}  // namespace ggrf
