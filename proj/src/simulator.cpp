#include "ggrf/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>
#include <variant>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/binomial.hpp>

#include "ggrf/error.hpp"
#include "ggrf/ggrf_engine.hpp"

namespace ggrf {

std::mt19937_64 make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::vector<std::uint32_t> words;
    words.reserve(2 + 2 * path.size());
    auto push = [&words](std::uint64_t v) {
        words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
        words.push_back(static_cast<std::uint32_t>(v >> 32));
    };
    push(seed);
    for (const auto p : path) push(p);
    std::seed_seq seq(words.begin(), words.end());
    return std::mt19937_64(seq);
}

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    auto rng = make_stream(seed, path);
    return rng();
}

void GenotypePopSpec::validate() const {
    if (n_subjects < 2) throw InputError("simulation needs at least 2 subjects");
    if (n_variants < 1) throw InputError("simulation needs at least 1 variant");
    if (!(maf_lo > 0.0 && maf_lo <= maf_hi && maf_hi <= 0.5)) {
        throw InputError("MAF law needs 0 < lo <= hi <= 0.5");
    }
    if (!(rare_fraction >= 0.0 && rare_fraction <= 1.0)) {
        throw InputError("rare fraction must lie in [0, 1]");
    }
}

double draw_population_maf(const GenotypePopSpec& spec, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double pick = unit(rng);
    const double u = unit(rng);
    double lo = spec.maf_lo;
    double hi = spec.maf_hi;
    if (spec.rare_cutoff > spec.maf_lo && spec.rare_cutoff < spec.maf_hi) {
        if (pick < spec.rare_fraction) {
            hi = spec.rare_cutoff;
        } else {
            lo = spec.rare_cutoff;
        }
    }
    return std::exp(std::log(lo) + u * (std::log(hi) - std::log(lo)));
}

GenotypeMatrix gen_genotypes(const GenotypePopSpec& spec) {
    spec.validate();
    const Eigen::Index n = spec.n_subjects;
    const Eigen::Index k = spec.n_variants;
    Eigen::MatrixXd dosages(n, k);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (Eigen::Index j = 0; j < k; ++j) {
        auto rng = make_stream(spec.seed, {0x67656e6fULL, static_cast<std::uint64_t>(j)});
        const double maf = draw_population_maf(spec, rng);
        for (int attempt = 0;; ++attempt) {
            double sum = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const double d = (unit(rng) < maf ? 1.0 : 0.0) + (unit(rng) < maf ? 1.0 : 0.0);
                dosages(i, j) = d;
                sum += d;
            }
            if (!spec.polymorphic_only || (sum > 0.0 && sum < 2.0 * static_cast<double>(n))) break;
            if (attempt > 100000) {
                throw DegenerateError("could not draw a polymorphic variant with MAF " +
                                      std::to_string(maf));
            }
        }
    }
    std::vector<std::string> subjects;
    std::vector<std::string> variants;
    subjects.reserve(static_cast<std::size_t>(n));
    variants.reserve(static_cast<std::size_t>(k));
    for (Eigen::Index i = 0; i < n; ++i) subjects.push_back("S" + std::to_string(i + 1));
    for (Eigen::Index j = 0; j < k; ++j) variants.push_back("V" + std::to_string(j + 1));
    return GenotypeMatrix(std::move(dosages), std::move(subjects), std::move(variants));
}

std::string to_string(DiseaseModel model) {
    switch (model) {
        case DiseaseModel::null: return "null";
        case DiseaseModel::s1: return "s1";
        case DiseaseModel::s2: return "s2";
        case DiseaseModel::s3: return "s3";
        case DiseaseModel::s4: return "s4";
    }
    return "?";
}

DiseaseModel parse_disease_model(const std::string& name) {
    if (name == "null" || name == "NULL") return DiseaseModel::null;
    if (name == "s1" || name == "S1") return DiseaseModel::s1;
    if (name == "s2" || name == "S2") return DiseaseModel::s2;
    if (name == "s3" || name == "S3") return DiseaseModel::s3;
    if (name == "s4" || name == "S4") return DiseaseModel::s4;
    throw InputError("unknown scenario '" + name + "' (expected s1|s2|s3|s4|null)");
}

std::string to_string(EffectDirection direction) {
    return direction == EffectDirection::bidirection ? "bidirection" : "one_direction";
}

EffectDirection parse_direction(const std::string& name) {
    if (name == "one_direction" || name == "one") return EffectDirection::one_direction;
    if (name == "bidirection" || name == "bi") return EffectDirection::bidirection;
    throw InputError("unknown effect direction '" + name + "'");
}

void ScenarioSpec::validate() const {
    if (n_causal < 0) throw InputError("causal count must be nonnegative");
    if (n_total < 0) throw InputError("total variant count must be nonnegative");
    if (!std::isfinite(effect_scale)) throw InputError("effect scale must be finite");
    if (!(target_case_fraction > 0.0 && target_case_fraction < 1.0)) {
        throw InputError("target case fraction must lie in (0, 1)");
    }
}

double causal_effect(DiseaseModel model, double maf, double effect_scale) {
    if (maf <= 0.0) return 0.0;
    switch (model) {
        case DiseaseModel::null: return 0.0;
        case DiseaseModel::s1: return effect_scale;
        case DiseaseModel::s2: {
            const double d = beta_density(maf, 1.0, 25.0);
            return effect_scale * d * d;
        }
        case DiseaseModel::s3: return effect_scale / (maf * (1.0 - maf));
        case DiseaseModel::s4: return effect_scale * (-std::log10(maf));
    }
    return 0.0;
}

double solve_intercept(const Eigen::VectorXd& eta, double target) {
    auto mean_prob = [&eta](double mu) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < eta.size(); ++i) {
            const double x = mu + eta[i];
            s += x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
        }
        return s / static_cast<double>(eta.size());
    };
    double lo = -60.0 - eta.maxCoeff();
    double hi = 60.0 - eta.minCoeff();
    for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mean_prob(mid) < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

SimulatedPhenotype gen_phenotype_detail(const GenotypeMatrix& g, const ScenarioSpec& sc) {
    sc.validate();
    const Eigen::Index k = g.n_variants();
    const Eigen::Index n = g.n_subjects();
    if (sc.n_total != 0 && sc.n_total != k) {
        throw InputError("scenario total " + std::to_string(sc.n_total) + " does not match " +
                         std::to_string(k) + " genotype columns");
    }
    const bool has_effects = sc.model != DiseaseModel::null;
    if (has_effects && sc.n_causal > k) {
        throw InputError("causal count " + std::to_string(sc.n_causal) + " exceeds " +
                         std::to_string(k) + " variants");
    }

    const std::uint64_t layout_seed = sc.causal_seed.value_or(sc.seed);
    std::vector<Eigen::Index> causal;
    Eigen::VectorXd effects = Eigen::VectorXd::Zero(k);
    if (has_effects) {
        auto pick = make_stream(layout_seed, {0x63617573ULL});
        std::vector<Eigen::Index> order(static_cast<std::size_t>(k));
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        for (Eigen::Index i = 0; i < sc.n_causal; ++i) {
            std::uniform_int_distribution<Eigen::Index> draw(i, k - 1);
            std::swap(order[static_cast<std::size_t>(i)],
                      order[static_cast<std::size_t>(draw(pick))]);
        }
        causal.assign(order.begin(), order.begin() + sc.n_causal);

        for (const auto j : causal) {
            const double maf = compute_maf(g.dosages().col(j));
            effects[j] = causal_effect(sc.model, maf, sc.effect_scale);
        }
        if (sc.direction == EffectDirection::bidirection) {
            auto flip = make_stream(layout_seed, {0x7369676eULL});
            std::vector<Eigen::Index> shuffled = causal;
            std::shuffle(shuffled.begin(), shuffled.end(), flip);
            for (std::size_t i = 0; i < shuffled.size() / 2; ++i) effects[shuffled[i]] *= -1.0;
        }
        std::sort(causal.begin(), causal.end());
    }

    Eigen::VectorXd eta = Eigen::VectorXd::Zero(n);
    if (has_effects) {
        for (const auto j : causal) {
            if (effects[j] != 0.0) eta.noalias() += effects[j] * g.dosages().col(j);
        }
    }
    if (!eta.allFinite()) throw InputError("simulated linear predictor is not finite");

    auto noise = make_stream(sc.seed, {0x6e6f6973ULL});
    Eigen::VectorXd y(n);
    double intercept = 0.0;
    if (sc.phenotype == PhenotypeKind::quantitative) {
        std::normal_distribution<double> normal;
        for (Eigen::Index i = 0; i < n; ++i) y[i] = eta[i] + normal(noise);
    } else {
        intercept = solve_intercept(eta, sc.target_case_fraction);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        bool has0 = false;
        bool has1 = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double x = intercept + eta[i];
            const double p = x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
            y[i] = unit(noise) < p ? 1.0 : 0.0;
            (y[i] == 1.0 ? has1 : has0) = true;
        }
        if (!has0 || !has1) throw DegenerateError("simulated binary phenotype has one class");
    }
    return SimulatedPhenotype{PhenotypeVector(std::move(y), sc.phenotype), std::move(causal),
                              std::move(effects), intercept};
}

PhenotypeVector gen_phenotype(const GenotypeMatrix& g, const ScenarioSpec& sc) {
    return gen_phenotype_detail(g, sc).phenotype;
}

std::string to_string(TestMethod method) {
    switch (method) {
        case TestMethod::ggrf: return "ggrf";
        case TestMethod::skat: return "skat";
        case TestMethod::burden: return "burden";
    }
    return "?";
}

TestMethod parse_test_method(const std::string& name) {
    if (name == "ggrf") return TestMethod::ggrf;
    if (name == "skat") return TestMethod::skat;
    if (name == "burden") return TestMethod::burden;
    throw InputError("unknown method '" + name + "' (expected ggrf|skat|burden)");
}

std::string MethodConfig::label() const {
    std::string out = to_string(method) + "/" + to_string(weights.scheme);
    if (method == TestMethod::ggrf) out += "/" + similarity.name();
    if (method == TestMethod::skat) out += "/" + to_string(kernel);
    return out;
}

std::pair<double, double> clopper_pearson(int successes, int trials, double level) {
    if (trials <= 0 || successes < 0 || successes > trials) {
        throw InputError("invalid binomial counts");
    }
    const double tail = 0.5 * (1.0 - level);
    const double x = successes;
    const double n = trials;
    const double lo = successes == 0
                          ? 0.0
                          : boost::math::quantile(boost::math::beta_distribution<double>(x, n - x + 1),
                                                  tail);
    const double hi = successes == trials
                          ? 1.0
                          : boost::math::quantile(boost::math::beta_distribution<double>(x + 1, n - x),
                                                  1.0 - tail);
    return {lo, hi};
}

std::pair<double, double> binomial_band(int trials, double alpha, double level) {
    using boost::math::policies::discrete_quantile;
    using boost::math::policies::integer_round_up;
    using boost::math::policies::policy;
    using Binomial =
        boost::math::binomial_distribution<double, policy<discrete_quantile<integer_round_up>>>;
    const Binomial dist(trials, alpha);
    const double tail = 0.5 * (1.0 - level);
    const double lo = boost::math::quantile(dist, tail);
    const double hi = boost::math::quantile(dist, 1.0 - tail);
    return {lo / trials, hi / trials};
}

namespace {

/// Everything about a method that depends only on the genotypes.
struct PreparedMethod {
    MethodConfig config;
    std::variant<std::monostate, GgrfModel, KernelMatrix, Eigen::VectorXd> state;
};

std::vector<PreparedMethod> prepare_methods(const std::vector<MethodConfig>& methods,
                                            const GenotypeMatrix& g) {
    std::vector<PreparedMethod> out;
    out.reserve(methods.size());
    for (const auto& m : methods) {
        const PreparedRegion region = prepare_region(g, m.weights);
        PreparedMethod pm{m, std::monostate{}};
        switch (m.method) {
            case TestMethod::ggrf: pm.state.emplace<GgrfModel>(region, m.similarity); break;
            case TestMethod::skat:
                pm.state = build_kernel(region.genotypes.dosages(), region.weights, m.kernel);
                break;
            case TestMethod::burden:
                pm.state = Eigen::VectorXd(region.genotypes.dosages() * region.weights);
                break;
        }
        out.push_back(std::move(pm));
    }
    return out;
}

double run_method(const PreparedMethod& m, const PhenotypeVector& y, const CovariateMatrix& x,
                  const NullFit& fit, const ProjectionRoot& root) {
    switch (m.config.method) {
        case TestMethod::ggrf: return std::get<GgrfModel>(m.state).test(y, fit, root).p_value;
        case TestMethod::skat:
            return kernel_score_test(y, fit, root, std::get<KernelMatrix>(m.state)).p_value;
        case TestMethod::burden:
            return burden_test(y, x, std::get<Eigen::VectorXd>(m.state)).p_value;
    }
    return 1.0;
}

struct ReplicateOutcome {
    std::vector<double> p_values;
    int redraws = 0;
    double case_fraction = 0.0;
    std::exception_ptr error;
};

}  // namespace

std::vector<PowerEstimate> estimate_power_many(const std::vector<MethodConfig>& methods,
                                               const GenotypePopSpec& pop,
                                               const ScenarioSpec& sc, int n_replicates,
                                               double alpha, const PowerOptions& options) {
    if (methods.empty()) throw InputError("no methods to evaluate");
    if (n_replicates < 100) throw InputError("at least 100 replicates are required");
    if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
    if (options.threads < 1) throw InputError("thread count must be positive");
    pop.validate();
    sc.validate();

    ScenarioSpec base = sc;
    if (base.n_total == 0) base.n_total = pop.n_variants;
    if (base.n_total != pop.n_variants) {
        throw InputError("scenario total does not match the population's variant count");
    }
    if (options.fix_causal_set && !base.causal_seed) base.causal_seed = derive_seed(sc.seed, {1});

    std::optional<GenotypeMatrix> fixed_g;
    std::vector<PreparedMethod> fixed_methods;
    if (!options.regenerate_genotypes) {
        fixed_g = gen_genotypes(pop);
        fixed_methods = prepare_methods(methods, *fixed_g);
    }
    const CovariateMatrix x = CovariateMatrix::intercept_only(pop.n_subjects);

    std::vector<ReplicateOutcome> outcomes(static_cast<std::size_t>(n_replicates));
    auto run_replicate = [&](int r) {
        ReplicateOutcome& out = outcomes[static_cast<std::size_t>(r)];
        try {
            std::optional<GenotypeMatrix> own_g;
            std::vector<PreparedMethod> own_methods;
            const GenotypeMatrix* g = fixed_g ? &*fixed_g : nullptr;
            const std::vector<PreparedMethod>* prepared = &fixed_methods;
            if (!fixed_g) {
                GenotypePopSpec rp = pop;
                rp.seed = derive_seed(pop.seed, {static_cast<std::uint64_t>(r)});
                own_g = gen_genotypes(rp);
                own_methods = prepare_methods(methods, *own_g);
                g = &*own_g;
                prepared = &own_methods;
            }
            for (int attempt = 0;; ++attempt) {
                ScenarioSpec rs = base;
                rs.seed = derive_seed(sc.seed, {static_cast<std::uint64_t>(r),
                                                static_cast<std::uint64_t>(attempt)});
                try {
                    const PhenotypeVector y = gen_phenotype(*g, rs);
                    const NullFit fit = fit_null(y, x);
                    const ProjectionRoot root(fit, x);
                    std::vector<double> ps;
                    ps.reserve(prepared->size());
                    for (const auto& m : *prepared) ps.push_back(run_method(m, y, x, fit, root));
                    out.p_values = std::move(ps);
                    out.case_fraction = y.values().mean();
                    out.redraws = attempt;
                    break;
                } catch (const DegenerateError&) {
                    if (attempt + 1 >= options.max_redraws) throw;
                }
            }
        } catch (const Error& e) {
            out.error = std::make_exception_ptr(
                Error(e.kind(), "replicate " + std::to_string(r) + ": " + e.what()));
        } catch (...) {
            out.error = std::current_exception();
        }
    };

    if (options.threads == 1) {
        for (int r = 0; r < n_replicates; ++r) run_replicate(r);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> workers;
        const int n_workers = std::min(options.threads, n_replicates);
        for (int t = 0; t < n_workers; ++t) {
            workers.emplace_back([&] {
                for (int r = next++; r < n_replicates; r = next++) run_replicate(r);
            });
        }
        for (auto& w : workers) w.join();
    }

    for (const auto& o : outcomes) {
        if (o.error) std::rethrow_exception(o.error);
    }

    std::vector<PowerEstimate> estimates(methods.size());
    for (std::size_t m = 0; m < methods.size(); ++m) {
        PowerEstimate& est = estimates[m];
        est.n_replicates = n_replicates;
        est.alpha = alpha;
        double cases = 0.0;
        for (const auto& o : outcomes) {
            const double p = o.p_values[m];
            if (p <= alpha) ++est.n_rejections;
            if (o.redraws > 0) ++est.n_redrawn;
            cases += o.case_fraction;
            if (options.keep_p_values) est.p_values.push_back(p);
        }
        est.rejection_rate = static_cast<double>(est.n_rejections) / n_replicates;
        std::tie(est.ci_low, est.ci_high) = clopper_pearson(est.n_rejections, n_replicates);
        est.mean_case_fraction = sc.phenotype == PhenotypeKind::binary ? cases / n_replicates : 0.0;
    }
    return estimates;
}

PowerEstimate estimate_power(const MethodConfig& method, const GenotypePopSpec& pop,
                             const ScenarioSpec& sc, int n_replicates, double alpha,
                             const PowerOptions& options) {
    return estimate_power_many({method}, pop, sc, n_replicates, alpha, options).front();
}

double calibrate_effect_scale(const MethodConfig& method, const GenotypePopSpec& pop,
                              const ScenarioSpec& sc, double target_power, int pilot_replicates,
                              double alpha, double lo, double hi, int steps,
                              const PowerOptions& options) {
    if (!(lo > 0.0 && lo < hi)) throw InputError("calibration bracket must satisfy 0 < lo < hi");
    double log_lo = std::log(lo);
    double log_hi = std::log(hi);
    for (int s = 0; s < steps; ++s) {
        const double mid = 0.5 * (log_lo + log_hi);
        ScenarioSpec trial = sc;
        trial.effect_scale = std::exp(mid);
        const double power =
            estimate_power(method, pop, trial, pilot_replicates, alpha, options).rejection_rate;
        if (power < target_power) {
            log_lo = mid;
        } else {
            log_hi = mid;
        }
    }
    return std::exp(0.5 * (log_lo + log_hi));
}

}  // namespace ggrf
