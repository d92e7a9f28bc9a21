#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ggrf/comparators.hpp"
#include "ggrf/data_model.hpp"
#include "ggrf/similarity.hpp"
#include "ggrf/weights.hpp"

namespace ggrf {

/// Independent generator stream for (seed, path...). Streams for different
/// paths are statistically independent and never depend on thread layout.
std::mt19937_64 make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

/// Seed for a child stream, e.g. replicate r of a scenario.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

/// Synthetic cohort: per variant, a population MAF from a two-piece
/// log-uniform law (a `rare_fraction` share below `rare_cutoff`), then
/// iid Binomial(2, MAF) dosages. Loci are independent.
struct GenotypePopSpec {
    Eigen::Index n_subjects = 697;
    Eigen::Index n_variants = 508;
    double maf_lo = 0.0007;
    double maf_hi = 0.494;
    double rare_fraction = 0.7;
    double rare_cutoff = 0.01;
    /// Redraw columns that come out monomorphic in the sample.
    bool polymorphic_only = true;
    std::uint64_t seed = 1;

    void validate() const;
};

double draw_population_maf(const GenotypePopSpec& spec, std::mt19937_64& rng);

/// Column k depends only on (seed, k), so the first K columns agree across
/// specs that differ only in n_variants.
GenotypeMatrix gen_genotypes(const GenotypePopSpec& spec);

enum class DiseaseModel { null, s1, s2, s3, s4 };
enum class EffectDirection { one_direction, bidirection };

std::string to_string(DiseaseModel model);
DiseaseModel parse_disease_model(const std::string& name);
std::string to_string(EffectDirection direction);
EffectDirection parse_direction(const std::string& name);

struct ScenarioSpec {
    DiseaseModel model = DiseaseModel::null;
    Eigen::Index n_causal = 50;
    /// 0 means "all variants of the genotype matrix".
    Eigen::Index n_total = 0;
    EffectDirection direction = EffectDirection::one_direction;
    double effect_scale = 0.0;
    PhenotypeKind phenotype = PhenotypeKind::quantitative;
    double target_case_fraction = 1.0 / 3.0;
    std::uint64_t seed = 1;
    /// When set, causal set and effect signs come from this seed instead of
    /// `seed` (fixed across replicates).
    std::optional<std::uint64_t> causal_seed;

    void validate() const;
};

/// Effect of one causal variant under a model, from its sample MAF.
/// Monomorphic variants get 0.
double causal_effect(DiseaseModel model, double maf, double effect_scale);

struct SimulatedPhenotype {
    PhenotypeVector phenotype;
    std::vector<Eigen::Index> causal;  // sorted column indices
    Eigen::VectorXd effects;           // length K, zero for noise variants
    double intercept = 0.0;
};

SimulatedPhenotype gen_phenotype_detail(const GenotypeMatrix& g, const ScenarioSpec& sc);
PhenotypeVector gen_phenotype(const GenotypeMatrix& g, const ScenarioSpec& sc);

/// Intercept mu with mean_i logistic(mu + eta_i) = target, by bisection.
double solve_intercept(const Eigen::VectorXd& eta, double target);

enum class TestMethod { ggrf, skat, burden };

std::string to_string(TestMethod method);
TestMethod parse_test_method(const std::string& name);

struct MethodConfig {
    TestMethod method = TestMethod::ggrf;
    WeightSpec weights;
    SimilaritySpec similarity;               // ggrf only
    KernelKind kernel = KernelKind::ibs;     // skat only

    /// e.g. "ggrf/beta/D1S", "skat/wss/ibs", "burden/log".
    std::string label() const;
};

struct PowerOptions {
    int threads = 1;
    bool regenerate_genotypes = false;
    bool fix_causal_set = false;
    bool keep_p_values = false;
    int max_redraws = 100;
};

struct PowerEstimate {
    double rejection_rate = 0.0;
    int n_replicates = 0;
    int n_rejections = 0;
    double alpha = 0.05;
    double ci_low = 0.0;
    double ci_high = 1.0;
    /// Replicates whose data were redrawn after a degenerate draw.
    int n_redrawn = 0;
    /// Mean fraction of cases (binary phenotypes only).
    double mean_case_fraction = 0.0;
    std::vector<double> p_values;
};

/// Exact (Clopper-Pearson) two-sided 95% interval for x successes in n.
std::pair<double, double> clopper_pearson(int successes, int trials, double level = 0.95);

/// Central binomial acceptance region for the rejection *rate* of a level
/// alpha test over n replicates: [q(0.025)/n, q(0.975)/n].
std::pair<double, double> binomial_band(int trials, double alpha, double level = 0.95);

/// Rejection rates of several methods on shared replicate data. Results are
/// independent of options.threads.
std::vector<PowerEstimate> estimate_power_many(const std::vector<MethodConfig>& methods,
                                               const GenotypePopSpec& pop,
                                               const ScenarioSpec& sc, int n_replicates,
                                               double alpha, const PowerOptions& options = {});

PowerEstimate estimate_power(const MethodConfig& method, const GenotypePopSpec& pop,
                             const ScenarioSpec& sc, int n_replicates, double alpha,
                             const PowerOptions& options = {});

/// Log-scale bisection for the effect scale giving `target_power` in a
/// pilot of `pilot_replicates` (common random numbers across steps).
double calibrate_effect_scale(const MethodConfig& method, const GenotypePopSpec& pop,
                              const ScenarioSpec& sc, double target_power, int pilot_replicates,
                              double alpha, double lo, double hi, int steps,
                              const PowerOptions& options = {});

}  // namespace ggrf
