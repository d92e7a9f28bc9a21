#include <doctest.h>

#include <sstream>

#include "ggrf/data_model.hpp"
#include "ggrf/error.hpp"
#include "helpers.hpp"

using namespace ggrf;

namespace {

std::string thrown_message(const std::function<void()>& f) {
    try {
        f();
    } catch (const std::exception& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_SUITE("data_model") {

TEST_CASE("genotype tsv: small file loads in order") {
    std::istringstream in("id\tV1\tV2\nA\t0\t1\nB\t2\t0\nC\t1\t1\n");
    const auto g = read_genotypes_tsv(in);
    CHECK(g.n_subjects() == 3);
    CHECK(g.n_variants() == 2);
    CHECK(g.missing_count() == 0);
    CHECK(g.subject_ids() == std::vector<std::string>{"A", "B", "C"});
    CHECK(g.variant_ids() == std::vector<std::string>{"V1", "V2"});
    CHECK(g.dosages()(1, 0) == 2.0);
    CHECK(g.dosages()(2, 1) == 1.0);
}

TEST_CASE("genotype tsv: dosage 3 is rejected with coordinates") {
    std::istringstream in("id\tV1\tV2\nA\t0\t1\nB\t3\t0\n");
    const auto msg = thrown_message([&] { read_genotypes_tsv(in, "g.tsv"); });
    CHECK(msg.find("g.tsv:3") != std::string::npos);
    CHECK(msg.find("V1") != std::string::npos);
    CHECK(msg.find("'3'") != std::string::npos);
    std::istringstream again("id\tV1\nA\t0\nB\t3\n");
    CHECK_THROWS_AS(read_genotypes_tsv(again), InputError);
}

TEST_CASE("genotype tsv: NA is a single missing entry") {
    std::istringstream in("id\tV1\tV2\nA\t0\tNA\nB\t2\t0\nC\t1\t1\n");
    const auto g = read_genotypes_tsv(in);
    CHECK(g.missing_count() == 1);
    CHECK(is_missing(g.dosages()(0, 1)));
}

TEST_CASE("genotype tsv: ragged row is a structural error") {
    std::istringstream in("id\tV1\tV2\nA\t0\t1\nB\t2\n");
    const auto msg = thrown_message([&] { read_genotypes_tsv(in); });
    CHECK(msg.find("expected 3 fields") != std::string::npos);
}

TEST_CASE("genotype tsv: write and reload is identical") {
    std::mt19937_64 rng(5);
    Eigen::MatrixXd d = testing::random_dosages(7, 4, rng);
    d(2, 3) = kMissingDosage;
    const auto g = testing::make_genotypes(d);
    std::stringstream buf;
    write_genotypes_tsv(g, buf);
    const auto back = read_genotypes_tsv(buf);
    CHECK(back == g);
    CHECK(back.subject_ids() == g.subject_ids());
    CHECK(back.variant_ids() == g.variant_ids());

    const auto imputed = impute_missing(g);
    std::stringstream buf2;
    write_genotypes_tsv(imputed, buf2);
    CHECK(read_genotypes_tsv(buf2).dosages() == imputed.dosages());
}

TEST_CASE("vcf: GT calls become ALT dosages") {
    std::istringstream in(
        "##fileformat=VCFv4.2\n"
        "#CHROM\tPOS\tID\tREF\tALT\tQUAL\tFILTER\tINFO\tFORMAT\ts1\ts2\ts3\n"
        "1\t100\trs1\tA\tG\t.\tPASS\t.\tGT\t0/1\t1|1\t./.\n"
        "1\t200\t.\tC\tT\t.\tPASS\t.\tGT:DP\t0/0:10\t0|1:4\t1/0:7\n");
    const auto g = read_vcf_dosages(in);
    CHECK(g.subject_ids() == std::vector<std::string>{"s1", "s2", "s3"});
    CHECK(g.variant_ids() == std::vector<std::string>{"rs1", "1:200"});
    CHECK(g.dosages()(0, 0) == 1.0);
    CHECK(g.dosages()(1, 0) == 2.0);
    CHECK(is_missing(g.dosages()(2, 0)));
    CHECK(g.dosages()(0, 1) == 0.0);
    CHECK(g.dosages()(2, 1) == 1.0);
}

TEST_CASE("vcf: multiallelic record is rejected with its line") {
    std::istringstream in(
        "#CHROM\tPOS\tID\tREF\tALT\tQUAL\tFILTER\tINFO\tFORMAT\ts1\ts2\n"
        "1\t100\trs1\tA\tG\t.\tPASS\t.\tGT\t0/1\t0/0\n"
        "1\t150\trs2\tA\tA,T\t.\tPASS\t.\tGT\t0/1\t0/0\n");
    const auto msg = thrown_message([&] { read_vcf_dosages(in, "x.vcf"); });
    CHECK(msg.find("x.vcf:3") != std::string::npos);
    CHECK(msg.find("unsupported record") != std::string::npos);
}

TEST_CASE("vcf: FORMAT without GT is rejected") {
    std::istringstream in(
        "#CHROM\tPOS\tID\tREF\tALT\tQUAL\tFILTER\tINFO\tFORMAT\ts1\ts2\n"
        "1\t100\trs1\tA\tG\t.\tPASS\t.\tDS\t0.4\t1.0\n");
    CHECK_THROWS_AS(read_vcf_dosages(in), InputError);
}

TEST_CASE("compute_maf: hand counts") {
    CHECK(compute_maf(Eigen::Vector4d(0, 1, 2, 0)) == doctest::Approx(0.375).epsilon(1e-15));
    CHECK(compute_maf(Eigen::Vector4d(0, 0, 0, 0)) == 0.0);
    CHECK(compute_maf(Eigen::Vector4d(2, 2, 2, 2)) == 0.0);
    CHECK(compute_maf(Eigen::Vector3d(2, kMissingDosage, 1)) == doctest::Approx(0.25));
    CHECK_THROWS_AS(compute_maf(Eigen::Vector2d(kMissingDosage, kMissingDosage)), InputError);
}

TEST_CASE("compute_maf: invariant under allele flip") {
    std::mt19937_64 rng(11);
    const Eigen::MatrixXd d = testing::random_dosages(40, 25, rng);
    for (Eigen::Index k = 0; k < d.cols(); ++k) {
        const Eigen::VectorXd flipped = (2.0 - d.col(k).array()).matrix();
        CHECK(compute_maf(d.col(k)) == doctest::Approx(compute_maf(flipped)).epsilon(1e-15));
        CHECK(compute_maf(d.col(k)) <= 0.5);
    }
}

TEST_CASE("impute_missing: column means fill only missing entries") {
    Eigen::MatrixXd d(3, 2);
    d << 0, 1, kMissingDosage, kMissingDosage, 2, 1;
    const auto g = testing::make_genotypes(d);
    const auto out = impute_missing(g);
    CHECK(out.real_valued());
    CHECK(out.missing_count() == 0);
    CHECK(out.dosages()(1, 0) == 1.0);
    CHECK(out.dosages()(1, 1) == 1.0);
    for (Eigen::Index i = 0; i < 3; ++i) {
        for (Eigen::Index k = 0; k < 2; ++k) {
            if (!is_missing(d(i, k))) CHECK(out.dosages()(i, k) == d(i, k));
        }
    }

    Eigen::MatrixXd e(2, 1);
    e << 1, kMissingDosage;
    CHECK(impute_missing(testing::make_genotypes(e)).dosages()(1, 0) == 1.0);

    std::mt19937_64 rng(3);
    const auto complete = testing::make_genotypes(testing::random_dosages(6, 3, rng));
    CHECK(impute_missing(complete).dosages() == complete.dosages());

    Eigen::MatrixXd all_missing(2, 1);
    all_missing << kMissingDosage, kMissingDosage;
    CHECK_THROWS_AS(impute_missing(testing::make_genotypes(all_missing)), InputError);
}

TEST_CASE("filter_monomorphic: drops MAF-zero columns in order") {
    Eigen::MatrixXd d(5, 3);
    // MAFs 0, 0.1, 0.3
    d << 0, 1, 1, 0, 0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 0;
    const auto g = testing::make_genotypes(d);
    const auto r = filter_monomorphic(g);
    CHECK(r.kept.n_variants() == 2);
    CHECK(r.dropped == std::vector<std::string>{"V1"});
    CHECK(r.kept.variant_ids() == std::vector<std::string>{"V2", "V3"});

    std::mt19937_64 rng(9);
    const auto poly = testing::make_genotypes(testing::random_dosages(10, 4, rng));
    CHECK(filter_monomorphic(poly).kept == poly);
    CHECK(filter_monomorphic(poly).dropped.empty());

    const auto mono = testing::make_genotypes(Eigen::MatrixXd::Constant(4, 3, 2.0));
    CHECK_THROWS_AS(filter_monomorphic(mono), DegenerateError);
}

TEST_CASE("constructors enforce invariants") {
    CHECK_THROWS_AS(testing::make_genotypes(Eigen::MatrixXd::Zero(1, 2)), InputError);
    Eigen::MatrixXd bad(2, 1);
    bad << 0, 1.5;
    CHECK_THROWS_AS(testing::make_genotypes(bad), InputError);
    CHECK_NOTHROW(GenotypeMatrix(bad, testing::ids("S", 2), testing::ids("V", 1), true));

    CHECK_THROWS_AS(PhenotypeVector(Eigen::Vector3d(0, 1, 2), PhenotypeKind::binary), InputError);
    CHECK_THROWS_AS(PhenotypeVector(Eigen::Vector3d(1, 1, 1), PhenotypeKind::binary),
                    DegenerateError);
    CHECK_THROWS_AS(PhenotypeVector(Eigen::Vector3d(1, NAN, 1), PhenotypeKind::quantitative),
                    InputError);

    Eigen::MatrixXd collinear(4, 2);
    collinear << 1, 2, 2, 4, 3, 6, 4, 8;
    CHECK_THROWS_AS(CovariateMatrix(collinear, {"a", "b"}), InputError);
    CHECK_THROWS_AS(CovariateMatrix(Eigen::MatrixXd::Constant(4, 1, 3.0), {"c"}), InputError);
    const auto x = CovariateMatrix::intercept_only(4);
    CHECK(x.design().cols() == 1);
    CHECK(x.design().isOnes());
}

TEST_CASE("assemble_cohort: joins by id and drops missing phenotypes") {
    Eigen::MatrixXd d(4, 2);
    d << 0, 1, 1, 0, 2, 1, 0, 0;
    const GenotypeMatrix g(d, {"a", "b", "c", "d"}, {"V1", "V2"});
    std::istringstream ph("id\ty\tcase\nd\t0.5\t1\nb\tNA\t0\na\t1.5\t0\nc\t2.5\t1\n");
    const auto table = read_subject_table(ph);
    std::istringstream cv("id\tage\tsex\na\t30\t0\nb\t40\t1\nc\t35\t1\nd\t50\t0\n");
    const auto covs = read_subject_table(cv);

    const auto cohort =
        assemble_cohort(g, table, "y", PhenotypeKind::quantitative, covs, {"age"});
    CHECK(cohort.genotypes.subject_ids() == std::vector<std::string>{"a", "c", "d"});
    CHECK(cohort.phenotype.values() == Eigen::Vector3d(1.5, 2.5, 0.5));
    CHECK(cohort.covariates.names() == std::vector<std::string>{"age"});
    CHECK(cohort.covariates.values().col(0) == Eigen::Vector3d(30, 35, 50));

    const auto binary = assemble_cohort(g, table, "case", PhenotypeKind::binary, std::nullopt);
    CHECK(binary.phenotype.size() == 4);
    CHECK(binary.covariates.n_covariates() == 0);
}

TEST_CASE("assemble_cohort: binary flag on a non-0/1 column names the column") {
    Eigen::MatrixXd d(3, 1);
    d << 0, 1, 2;
    const GenotypeMatrix g(d, {"a", "b", "c"}, {"V1"});
    std::istringstream ph("id\tbmi\na\t21.5\nb\t30.1\nc\t25\n");
    const auto table = read_subject_table(ph);
    try {
        assemble_cohort(g, table, "bmi", PhenotypeKind::binary, std::nullopt);
        FAIL("expected an input error");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("bmi") != std::string::npos);
    }
}

}
