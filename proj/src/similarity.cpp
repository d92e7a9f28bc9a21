#include "ggrf/similarity.hpp"

#include <cctype>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "ggrf/error.hpp"

namespace ggrf {

void SimilaritySpec::validate() const {
    if (p_order < 1 || p_order > 4) {
        throw InputError("similarity order must be 1..4, got " + std::to_string(p_order));
    }
}

std::string SimilaritySpec::name() const {
    return "D" + std::to_string(p_order) + "S" + (centered ? "-centered" : "");
}

SimilaritySpec parse_similarity(const std::string& name) {
    // accepted: d1s..d4s, D2S, ibs, with an optional "-centered" / "c" suffix
    std::string base = name;
    SimilaritySpec spec;
    for (const std::string suffix : {"-centered", "_centered", "-cen"}) {
        if (base.size() > suffix.size() &&
            base.compare(base.size() - suffix.size(), suffix.size(), suffix) == 0) {
            spec.centered = true;
            base.resize(base.size() - suffix.size());
            break;
        }
    }
    for (auto& c : base) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (base == "ibs") {
        spec.p_order = 1;
    } else if (base.size() == 3 && base[0] == 'd' && base[2] == 's' && base[1] >= '1' &&
               base[1] <= '4') {
        spec.p_order = base[1] - '0';
    } else {
        throw InputError("unknown similarity '" + name + "' (expected d1s..d4s or ibs, optional "
                                                         "-centered suffix)");
    }
    return spec;
}

SimilarityMatrix::SimilarityMatrix(Eigen::MatrixXd values, SimilaritySpec spec, double supremum_b)
    : values_(std::move(values)), spec_(spec), supremum_b_(supremum_b) {
    if (values_.rows() != values_.cols()) throw InputError("similarity matrix must be square");
}

namespace {

double ipow(double x, int p) {
    switch (p) {
        case 1: return x;
        case 2: return x * x;
        case 3: return x * x * x;
        default: {
            const double x2 = x * x;
            return x2 * x2;
        }
    }
}

double iroot(double x, int p) {
    switch (p) {
        case 1: return x;
        case 2: return std::sqrt(x);
        case 3: return std::cbrt(x);
        default: return std::sqrt(std::sqrt(x));
    }
}

}  // namespace

SimilarityMatrix nds_similarity(const Eigen::MatrixXd& dosages, const Eigen::VectorXd& weights,
                                int p_order) {
    SimilaritySpec spec{p_order, false};
    spec.validate();
    if (weights.size() != dosages.cols()) {
        throw InputError("weight vector length " + std::to_string(weights.size()) +
                         " does not match " + std::to_string(dosages.cols()) + " variants");
    }
    if ((weights.array() < 0.0).any() || !weights.allFinite()) {
        throw InputError("weights must be finite and nonnegative");
    }
    const double total = weights.sum();
    if (!(total > 0.0)) throw DegenerateError("weights sum to zero");
    if (!dosages.allFinite()) {
        throw InputError("similarity requires complete dosages; impute missing values first");
    }

    const double b = 2.0 * iroot(total, p_order);
    const Eigen::Index n = dosages.rows();
    const Eigen::Index k = dosages.cols();
    // subjects as contiguous columns
    const Eigen::MatrixXd gt = dosages.transpose();
    Eigen::MatrixXd s(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        s(i, i) = 0.0;
        const double* gi = gt.col(i).data();
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double* gj = gt.col(j).data();
            double acc = 0.0;
            for (Eigen::Index v = 0; v < k; ++v) {
                acc += weights[v] * ipow(std::abs(gi[v] - gj[v]), p_order);
            }
            const double value = b - iroot(acc, p_order);
            s(i, j) = value;
            s(j, i) = value;
        }
    }
    return SimilarityMatrix(std::move(s), spec, b);
}

SimilarityMatrix nds_similarity(const GenotypeMatrix& g, const Eigen::VectorXd& weights,
                                int p_order) {
    return nds_similarity(g.dosages(), weights, p_order);
}

Eigen::MatrixXd double_center(const Eigen::MatrixXd& s) {
    // (I - J) S (I - J) = S - r 1' - 1 c' + m 11'
    const Eigen::VectorXd row_mean = s.rowwise().mean();
    const Eigen::RowVectorXd col_mean = s.colwise().mean();
    const double grand = s.mean();
    Eigen::MatrixXd out = s;
    out.colwise() -= row_mean;
    out.rowwise() -= col_mean;
    out.array() += grand;
    return out;
}

SimilarityMatrix center_similarity(const SimilarityMatrix& s) {
    if (s.spec().centered) throw InputError("similarity matrix is already centered");
    Eigen::MatrixXd c = double_center(s.values());
    c.diagonal().setZero();
    SimilaritySpec spec = s.spec();
    spec.centered = true;
    return SimilarityMatrix(std::move(c), spec, s.supremum_b());
}

SimilarityMatrix build_similarity(const Eigen::MatrixXd& dosages, const Eigen::VectorXd& weights,
                                  const SimilaritySpec& spec) {
    auto s = nds_similarity(dosages, weights, spec.p_order);
    return spec.centered ? center_similarity(s) : s;
}

void write_similarity_tsv(const SimilarityMatrix& s, const std::vector<std::string>& subject_ids,
                          std::ostream& out) {
    out << "subject_id";
    for (const auto& id : subject_ids) out << '\t' << id;
    out << '\n';
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        out << subject_ids[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < s.size(); ++j) {
            out << '\t' << std::setprecision(10) << s.values()(i, j);
        }
        out << '\n';
    }
}

}  // namespace ggrf
