#include "ggrf/data_model.hpp"

#include <algorithm>
#include <unordered_map>

#include "ggrf/error.hpp"

namespace ggrf {

GenotypeMatrix::GenotypeMatrix(Eigen::MatrixXd dosages, std::vector<std::string> subject_ids,
                               std::vector<std::string> variant_ids, bool real_valued)
    : dosages_(std::move(dosages)),
      subject_ids_(std::move(subject_ids)),
      variant_ids_(std::move(variant_ids)),
      real_valued_(real_valued) {
    if (dosages_.rows() < 2) {
        throw InputError("genotype matrix needs at least 2 subjects");
    }
    if (dosages_.cols() < 1) {
        throw InputError("genotype matrix needs at least 1 variant");
    }
    if (static_cast<Eigen::Index>(subject_ids_.size()) != dosages_.rows() ||
        static_cast<Eigen::Index>(variant_ids_.size()) != dosages_.cols()) {
        throw InputError("genotype matrix dimensions do not match id lists");
    }
    for (Eigen::Index j = 0; j < dosages_.cols(); ++j) {
        for (Eigen::Index i = 0; i < dosages_.rows(); ++i) {
            const double d = dosages_(i, j);
            if (is_missing(d)) continue;
            const bool ok = real_valued_ ? (d >= 0.0 && d <= 2.0)
                                         : (d == 0.0 || d == 1.0 || d == 2.0);
            if (!ok) {
                throw InputError("invalid dosage " + std::to_string(d) + " for subject " +
                                 subject_ids_[i] + ", variant " + variant_ids_[j]);
            }
        }
    }
}

Eigen::Index GenotypeMatrix::missing_count() const {
    return dosages_.unaryExpr([](double d) { return is_missing(d) ? 1.0 : 0.0; })
        .sum();
}

GenotypeMatrix GenotypeMatrix::select_variants(const std::vector<Eigen::Index>& columns) const {
    Eigen::MatrixXd sub(dosages_.rows(), static_cast<Eigen::Index>(columns.size()));
    std::vector<std::string> ids;
    ids.reserve(columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) {
        sub.col(static_cast<Eigen::Index>(c)) = dosages_.col(columns[c]);
        ids.push_back(variant_ids_[columns[c]]);
    }
    return GenotypeMatrix(std::move(sub), subject_ids_, std::move(ids), real_valued_);
}

GenotypeMatrix GenotypeMatrix::select_subjects(const std::vector<Eigen::Index>& rows) const {
    Eigen::MatrixXd sub(static_cast<Eigen::Index>(rows.size()), dosages_.cols());
    std::vector<std::string> ids;
    ids.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        sub.row(static_cast<Eigen::Index>(r)) = dosages_.row(rows[r]);
        ids.push_back(subject_ids_[rows[r]]);
    }
    return GenotypeMatrix(std::move(sub), std::move(ids), variant_ids_, real_valued_);
}

bool operator==(const GenotypeMatrix& a, const GenotypeMatrix& b) {
    if (a.subject_ids_ != b.subject_ids_ || a.variant_ids_ != b.variant_ids_) return false;
    if (a.dosages_.rows() != b.dosages_.rows() || a.dosages_.cols() != b.dosages_.cols()) {
        return false;
    }
    for (Eigen::Index j = 0; j < a.dosages_.cols(); ++j) {
        for (Eigen::Index i = 0; i < a.dosages_.rows(); ++i) {
            const double x = a.dosages_(i, j);
            const double y = b.dosages_(i, j);
            if (is_missing(x) != is_missing(y)) return false;
            if (!is_missing(x) && x != y) return false;
        }
    }
    return true;
}

std::string to_string(PhenotypeKind kind) {
    return kind == PhenotypeKind::binary ? "binary" : "quantitative";
}

PhenotypeKind parse_phenotype_kind(const std::string& name) {
    if (name == "quantitative") return PhenotypeKind::quantitative;
    if (name == "binary") return PhenotypeKind::binary;
    throw InputError("unknown phenotype kind '" + name + "'");
}

PhenotypeVector::PhenotypeVector(Eigen::VectorXd values, PhenotypeKind kind)
    : values_(std::move(values)), kind_(kind) {
    if (values_.size() < 2) throw InputError("phenotype needs at least 2 subjects");
    for (Eigen::Index i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw InputError("phenotype value " + std::to_string(i) + " is missing or not finite");
        }
    }
    if (kind_ == PhenotypeKind::binary) {
        bool has0 = false;
        bool has1 = false;
        for (Eigen::Index i = 0; i < values_.size(); ++i) {
            if (values_[i] == 0.0) {
                has0 = true;
            } else if (values_[i] == 1.0) {
                has1 = true;
            } else {
                throw InputError("binary phenotype value " + std::to_string(values_[i]) +
                                 " at position " + std::to_string(i) + " is not 0/1");
            }
        }
        if (!has0 || !has1) throw DegenerateError("binary phenotype has a single class");
    }
}

CovariateMatrix::CovariateMatrix(Eigen::MatrixXd values, std::vector<std::string> names)
    : values_(std::move(values)), names_(std::move(names)) {
    if (static_cast<Eigen::Index>(names_.size()) != values_.cols()) {
        throw InputError("covariate names do not match covariate columns");
    }
    if (values_.rows() < 2) throw InputError("covariates need at least 2 subjects");
    if (!values_.allFinite()) throw InputError("covariates contain missing or non-finite values");
    design_.resize(values_.rows(), values_.cols() + 1);
    design_.col(0).setOnes();
    design_.rightCols(values_.cols()) = values_;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design_);
    if (qr.rank() < design_.cols()) {
        throw InputError("design matrix [intercept | covariates] is rank deficient");
    }
}

CovariateMatrix CovariateMatrix::intercept_only(Eigen::Index n_subjects) {
    return CovariateMatrix(Eigen::MatrixXd(n_subjects, 0), {});
}

double compute_maf(const Eigen::Ref<const Eigen::VectorXd>& column) {
    double sum = 0.0;
    Eigen::Index called = 0;
    for (Eigen::Index i = 0; i < column.size(); ++i) {
        if (is_missing(column[i])) continue;
        sum += column[i];
        ++called;
    }
    if (called == 0) throw InputError("cannot compute MAF of an all-missing variant");
    const double p = sum / (2.0 * static_cast<double>(called));
    return std::min(p, 1.0 - p);
}

std::vector<VariantMeta> variant_meta(const GenotypeMatrix& g) {
    std::vector<VariantMeta> out;
    out.reserve(static_cast<std::size_t>(g.n_variants()));
    for (Eigen::Index k = 0; k < g.n_variants(); ++k) {
        const auto col = g.dosages().col(k);
        VariantMeta m;
        m.id = g.variant_ids()[static_cast<std::size_t>(k)];
        m.n_missing = col.unaryExpr([](double d) { return is_missing(d) ? 1.0 : 0.0; }).sum();
        m.maf = compute_maf(col);
        out.push_back(std::move(m));
    }
    return out;
}

Eigen::VectorXd maf_vector(const GenotypeMatrix& g) {
    Eigen::VectorXd out(g.n_variants());
    for (Eigen::Index k = 0; k < g.n_variants(); ++k) out[k] = compute_maf(g.dosages().col(k));
    return out;
}

GenotypeMatrix impute_missing(const GenotypeMatrix& g) {
    if (!g.has_missing()) return g;
    Eigen::MatrixXd d = g.dosages();
    for (Eigen::Index k = 0; k < d.cols(); ++k) {
        double sum = 0.0;
        Eigen::Index called = 0;
        for (Eigen::Index i = 0; i < d.rows(); ++i) {
            if (is_missing(d(i, k))) continue;
            sum += d(i, k);
            ++called;
        }
        if (called == 0) {
            throw InputError("variant " + g.variant_ids()[static_cast<std::size_t>(k)] +
                             " has no called genotypes");
        }
        const double mean = sum / static_cast<double>(called);
        for (Eigen::Index i = 0; i < d.rows(); ++i) {
            if (is_missing(d(i, k))) d(i, k) = mean;
        }
    }
    return GenotypeMatrix(std::move(d), g.subject_ids(), g.variant_ids(), true);
}

FilterResult filter_monomorphic(const GenotypeMatrix& g) {
    std::vector<Eigen::Index> keep;
    std::vector<std::string> dropped;
    for (Eigen::Index k = 0; k < g.n_variants(); ++k) {
        if (compute_maf(g.dosages().col(k)) > 0.0) {
            keep.push_back(k);
        } else {
            dropped.push_back(g.variant_ids()[static_cast<std::size_t>(k)]);
        }
    }
    if (keep.empty()) throw DegenerateError("all variants in the region are monomorphic");
    if (dropped.empty()) return FilterResult{g, {}};
    return FilterResult{g.select_variants(keep), std::move(dropped)};
}

Eigen::Index SubjectTable::column_index(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw InputError("column '" + name + "' not found");
    return static_cast<Eigen::Index>(it - columns.begin());
}

Cohort assemble_cohort(const GenotypeMatrix& genotypes, const SubjectTable& phenotypes,
                       const std::string& phenotype_column, PhenotypeKind kind,
                       const std::optional<SubjectTable>& covariates,
                       const std::vector<std::string>& covariate_columns) {
    const Eigen::Index pcol = phenotypes.column_index(phenotype_column);

    std::unordered_map<std::string, Eigen::Index> pheno_row;
    for (std::size_t i = 0; i < phenotypes.subject_ids.size(); ++i) {
        pheno_row.emplace(phenotypes.subject_ids[i], static_cast<Eigen::Index>(i));
    }
    std::unordered_map<std::string, Eigen::Index> cov_row;
    std::vector<Eigen::Index> cov_cols;
    std::vector<std::string> cov_names;
    if (covariates) {
        for (std::size_t i = 0; i < covariates->subject_ids.size(); ++i) {
            cov_row.emplace(covariates->subject_ids[i], static_cast<Eigen::Index>(i));
        }
        cov_names = covariate_columns.empty() ? covariates->columns : covariate_columns;
        for (const auto& name : cov_names) cov_cols.push_back(covariates->column_index(name));
    }

    std::vector<Eigen::Index> geno_rows;
    std::vector<double> y;
    std::vector<Eigen::Index> cov_rows;
    for (Eigen::Index i = 0; i < genotypes.n_subjects(); ++i) {
        const auto& id = genotypes.subject_ids()[static_cast<std::size_t>(i)];
        const auto p = pheno_row.find(id);
        if (p == pheno_row.end()) continue;
        const double value = phenotypes.values(p->second, pcol);
        if (std::isnan(value)) continue;
        Eigen::Index crow = -1;
        if (covariates) {
            const auto c = cov_row.find(id);
            if (c == cov_row.end()) continue;
            bool complete = true;
            for (const auto col : cov_cols) {
                if (std::isnan(covariates->values(c->second, col))) complete = false;
            }
            if (!complete) continue;
            crow = c->second;
        }
        if (kind == PhenotypeKind::binary && value != 0.0 && value != 1.0) {
            throw InputError("phenotype column '" + phenotype_column +
                             "' declared binary but subject " + id + " has value " +
                             std::to_string(value));
        }
        geno_rows.push_back(i);
        y.push_back(value);
        cov_rows.push_back(crow);
    }
    if (geno_rows.size() < 2) throw InputError("fewer than 2 subjects shared by all inputs");

    Eigen::MatrixXd cov(static_cast<Eigen::Index>(geno_rows.size()),
                        static_cast<Eigen::Index>(cov_cols.size()));
    for (std::size_t r = 0; r < cov_rows.size(); ++r) {
        for (std::size_t c = 0; c < cov_cols.size(); ++c) {
            cov(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                covariates->values(cov_rows[r], cov_cols[c]);
        }
    }
    return Cohort{genotypes.select_subjects(geno_rows),
                  PhenotypeVector(Eigen::Map<Eigen::VectorXd>(y.data(),
                                                              static_cast<Eigen::Index>(y.size())),
                                  kind),
                  CovariateMatrix(std::move(cov), std::move(cov_names))};
}

}  // namespace ggrf
