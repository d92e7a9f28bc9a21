#pragma once

#include <cmath>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ggrf {

/// Marker stored in dosage matrices for an uncalled genotype.
inline constexpr double kMissingDosage = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double dosage) noexcept { return std::isnan(dosage); }

/// N x K additive dosage matrix with subject and variant identifiers.
///
/// Called genotypes hold 0, 1 or 2; missing calls hold kMissingDosage.
/// After imputation the matrix is marked real-valued and may contain any
/// value in [0, 2].
class GenotypeMatrix {
public:
    GenotypeMatrix(Eigen::MatrixXd dosages, std::vector<std::string> subject_ids,
                   std::vector<std::string> variant_ids, bool real_valued = false);

    Eigen::Index n_subjects() const noexcept { return dosages_.rows(); }
    Eigen::Index n_variants() const noexcept { return dosages_.cols(); }

    const Eigen::MatrixXd& dosages() const noexcept { return dosages_; }
    const std::vector<std::string>& subject_ids() const noexcept { return subject_ids_; }
    const std::vector<std::string>& variant_ids() const noexcept { return variant_ids_; }
    bool real_valued() const noexcept { return real_valued_; }

    Eigen::Index missing_count() const;
    bool has_missing() const { return missing_count() > 0; }

    /// Column subset in the given order.
    GenotypeMatrix select_variants(const std::vector<Eigen::Index>& columns) const;
    /// Row subset in the given order.
    GenotypeMatrix select_subjects(const std::vector<Eigen::Index>& rows) const;

    friend bool operator==(const GenotypeMatrix& a, const GenotypeMatrix& b);

private:
    Eigen::MatrixXd dosages_;
    std::vector<std::string> subject_ids_;
    std::vector<std::string> variant_ids_;
    bool real_valued_;
};

enum class PhenotypeKind { quantitative, binary };

std::string to_string(PhenotypeKind kind);
PhenotypeKind parse_phenotype_kind(const std::string& name);

/// Complete (no missing) phenotype vector. Binary vectors hold 0/1 with
/// both classes present.
class PhenotypeVector {
public:
    PhenotypeVector(Eigen::VectorXd values, PhenotypeKind kind);

    const Eigen::VectorXd& values() const noexcept { return values_; }
    PhenotypeKind kind() const noexcept { return kind_; }
    Eigen::Index size() const noexcept { return values_.size(); }

private:
    Eigen::VectorXd values_;
    PhenotypeKind kind_;
};

/// N x M covariates. An intercept column is always prepended when the
/// design matrix is formed; `values` never contains it.
class CovariateMatrix {
public:
    CovariateMatrix(Eigen::MatrixXd values, std::vector<std::string> names);

    static CovariateMatrix intercept_only(Eigen::Index n_subjects);

    Eigen::Index n_subjects() const noexcept { return values_.rows(); }
    Eigen::Index n_covariates() const noexcept { return values_.cols(); }
    const Eigen::MatrixXd& values() const noexcept { return values_; }
    const std::vector<std::string>& names() const noexcept { return names_; }

    /// [1 | values], N x (M + 1).
    const Eigen::MatrixXd& design() const noexcept { return design_; }

private:
    Eigen::MatrixXd values_;
    std::vector<std::string> names_;
    Eigen::MatrixXd design_;
};

struct VariantMeta {
    std::string id;
    double maf = 0.0;
    Eigen::Index n_missing = 0;
};

/// Folded sample allele frequency of a dosage column, ignoring missing
/// entries. Throws InputError when every entry is missing.
double compute_maf(const Eigen::Ref<const Eigen::VectorXd>& column);

std::vector<VariantMeta> variant_meta(const GenotypeMatrix& g);
Eigen::VectorXd maf_vector(const GenotypeMatrix& g);

/// Replace missing dosages by the column mean of the called dosages.
GenotypeMatrix impute_missing(const GenotypeMatrix& g);

struct FilterResult {
    GenotypeMatrix kept;
    std::vector<std::string> dropped;
};

/// Remove variants whose MAF is zero. Throws DegenerateError if nothing
/// survives.
FilterResult filter_monomorphic(const GenotypeMatrix& g);

// ---------------------------------------------------------------------------
// File formats

GenotypeMatrix load_genotypes_tsv(const std::string& path);
GenotypeMatrix read_genotypes_tsv(std::istream& in, const std::string& source = "<stream>");
void write_genotypes_tsv(const GenotypeMatrix& g, std::ostream& out);
void write_genotypes_tsv(const GenotypeMatrix& g, const std::string& path);

/// Biallelic GT-only VCF reader; dosage counts ALT alleles.
GenotypeMatrix load_vcf_dosages(const std::string& path);
GenotypeMatrix read_vcf_dosages(std::istream& in, const std::string& source = "<stream>");

/// Subject-keyed numeric table (phenotypes, covariates). "NA" cells are
/// stored as NaN.
struct SubjectTable {
    std::vector<std::string> subject_ids;
    std::vector<std::string> columns;
    Eigen::MatrixXd values;

    Eigen::Index column_index(const std::string& name) const;
};

SubjectTable load_subject_table(const std::string& path);
SubjectTable read_subject_table(std::istream& in, const std::string& source = "<stream>");

/// variant id -> region id. Two whitespace-separated columns, '#' comments.
std::map<std::string, std::string> load_region_map(const std::string& path);

/// Genotypes, phenotype and covariates restricted to the subjects present
/// in all inputs, ordered as in the genotype file.
struct Cohort {
    GenotypeMatrix genotypes;
    PhenotypeVector phenotype;
    CovariateMatrix covariates;
};

/// Joins inputs by subject id and drops subjects with a missing phenotype
/// or covariate. Throws InputError naming the column when a binary column
/// contains values other than 0/1.
Cohort assemble_cohort(const GenotypeMatrix& genotypes, const SubjectTable& phenotypes,
                       const std::string& phenotype_column, PhenotypeKind kind,
                       const std::optional<SubjectTable>& covariates,
                       const std::vector<std::string>& covariate_columns = {});

}  // namespace ggrf
