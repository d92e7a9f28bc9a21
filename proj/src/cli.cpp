#include "ggrf/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "ggrf/chisq_mixture.hpp"
#include "ggrf/comparators.hpp"
#include "ggrf/data_model.hpp"
#include "ggrf/error.hpp"
#include "ggrf/ggrf_engine.hpp"
#include "ggrf/simulator.hpp"
#include "ggrf/weights.hpp"

namespace ggrf {

namespace {

using nlohmann::json;

std::string fmt(double value, int digits = 6) {
    if (!std::isfinite(value)) return "NA";
    std::ostringstream ss;
    ss << std::setprecision(digits) << value;
    return ss.str();
}

/// Value rounded to `digits` significant digits, for JSON output.
json rounded(double value, int digits = 6) {
    if (!std::isfinite(value)) return nullptr;
    return std::stod(fmt(value, digits));
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<double> parse_doubles(const std::string& text) {
    std::vector<double> out;
    for (const auto& item : split_list(text)) {
        try {
            std::size_t used = 0;
            const double v = std::stod(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw InputError("cannot parse '" + item + "' as a number");
        }
    }
    return out;
}

/// Result destination: stdout for "-", otherwise a file opened on demand.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : fallback_(fallback) {
        if (path != "-") {
            file_.open(path);
            if (!file_) throw InputError("cannot write '" + path + "'");
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : fallback_; }

private:
    std::ofstream file_;
    std::ostream& fallback_;
};

/// Rows shared by all result files: TSV with a provenance comment, or
/// newline-delimited JSON.
class TableWriter {
public:
    TableWriter(std::ostream& out, bool as_json, std::vector<std::string> columns,
                const std::string& provenance)
        : out_(out), json_(as_json), columns_(std::move(columns)) {
        if (!json_) {
            out_ << "# ggrf " << kToolVersion << ' ' << provenance << '\n';
            for (std::size_t c = 0; c < columns_.size(); ++c) {
                out_ << (c ? "\t" : "") << columns_[c];
            }
            out_ << '\n';
        }
    }

    /// Cells as text for TSV; `values` are the JSON counterparts.
    void row(const std::vector<std::string>& cells, const std::vector<json>& values) {
        if (json_) {
            json obj = json::object();
            for (std::size_t c = 0; c < columns_.size(); ++c) obj[columns_[c]] = values[c];
            out_ << obj.dump() << '\n';
            return;
        }
        for (std::size_t c = 0; c < cells.size(); ++c) out_ << (c ? "\t" : "") << cells[c];
        out_ << '\n';
    }

private:
    std::ostream& out_;
    bool json_;
    std::vector<std::string> columns_;
};

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::input: return kExitInput;
        case ErrorKind::degenerate: return kExitDegenerate;
        case ErrorKind::internal: return kExitInternal;
    }
    return kExitInternal;
}

// ---------------------------------------------------------------------------
// test

struct TestOptions {
    std::string genotypes;
    std::string vcf;
    std::string phenotype;
    std::string pheno_column;
    std::string pheno_type = "quantitative";
    std::string covariates;
    std::string covariate_columns;
    std::string regions;
    std::string method = "ggrf";
    std::string weights = "beta";
    std::string similarity = "d1s";
    std::string kernel = "linear";
    std::string out = "-";
    std::string format = "tsv";
    std::string dump_similarity;
    std::string diagnostics;
    int threads = 1;
};

struct RegionOutcome {
    std::string region;
    Eigen::Index n_input = 0;
    Eigen::Index n_used = 0;
    double statistic = std::numeric_limits<double>::quiet_NaN();
    double p_value = std::numeric_limits<double>::quiet_NaN();
    std::string error;
    json diagnostics;
};

RegionOutcome test_region(const std::string& region, const Cohort& cohort,
                          const std::vector<Eigen::Index>& columns, const TestOptions& opt,
                          const WeightSpec& wspec, const SimilaritySpec& sspec,
                          const std::string& dump_path) {
    RegionOutcome out;
    out.region = region;
    out.n_input = static_cast<Eigen::Index>(columns.size());
    try {
        const GenotypeMatrix g = cohort.genotypes.select_variants(columns);
        const PreparedRegion prepared = prepare_region(g, wspec);
        out.n_used = prepared.genotypes.n_variants();
        json diag = {{"region", region},
                     {"dropped_monomorphic", prepared.dropped},
                     {"n_subjects", cohort.phenotype.size()}};
        const TestMethod method = parse_test_method(opt.method);
        if (method == TestMethod::ggrf) {
            const GgrfModel model(prepared, sspec);
            if (!dump_path.empty()) {
                std::ofstream dump(dump_path);
                if (!dump) throw InputError("cannot write '" + dump_path + "'");
                write_similarity_tsv(model.similarity(), prepared.genotypes.subject_ids(), dump);
            }
            const GgrfResult r = model.test(cohort.phenotype, cohort.covariates);
            out.statistic = r.gamma_hat;
            out.p_value = r.p_value;
            diag["gamma_hat"] = r.gamma_hat;
            diag["p_value"] = r.p_value;
            diag["p_approximate"] = r.p_approximate;
            diag["mixture_fault"] = r.mixture_fault;
            diag["n_truncated"] = r.n_truncated;
            diag["link"] = to_string(r.link);
            diag["null_iterations"] = r.null_iterations;
            diag["spectrum"] = std::vector<double>(r.eigenvalues.data(),
                                                   r.eigenvalues.data() + r.eigenvalues.size());
        } else {
            ComparatorResult r;
            if (method == TestMethod::skat) {
                r = kernel_score_test(cohort.phenotype, cohort.covariates, prepared.genotypes,
                                      prepared.weights, parse_kernel_kind(opt.kernel));
            } else {
                r = burden_test(cohort.phenotype, cohort.covariates, prepared.genotypes,
                                prepared.weights);
            }
            out.statistic = r.statistic;
            out.p_value = r.p_value;
            diag["statistic"] = r.statistic;
            diag["p_value"] = r.p_value;
            diag["detail"] = r.detail;
        }
        out.diagnostics = std::move(diag);
    } catch (const DegenerateError& e) {
        out.error = e.what();
        out.diagnostics = {{"region", region}, {"error", e.what()}};
    }
    return out;
}

int run_test(const TestOptions& opt, std::ostream& out, std::ostream& err) {
    if (opt.genotypes.empty() == opt.vcf.empty()) {
        throw InputError("give exactly one of --genotypes or --vcf");
    }
    if (opt.threads < 1) throw InputError("--threads must be positive");
    const WeightSpec wspec{parse_weight_scheme(opt.weights)};
    const SimilaritySpec sspec = parse_similarity(opt.similarity);
    const TestMethod method = parse_test_method(opt.method);
    if (method == TestMethod::skat) parse_kernel_kind(opt.kernel);
    const PhenotypeKind kind = parse_phenotype_kind(opt.pheno_type);

    const GenotypeMatrix genotypes =
        opt.vcf.empty() ? load_genotypes_tsv(opt.genotypes) : load_vcf_dosages(opt.vcf);
    const SubjectTable phenos = load_subject_table(opt.phenotype);
    const std::string column = opt.pheno_column.empty() ? phenos.columns.front() : opt.pheno_column;
    std::optional<SubjectTable> covs;
    if (!opt.covariates.empty()) covs = load_subject_table(opt.covariates);
    const Cohort cohort = assemble_cohort(genotypes, phenos, column, kind, covs,
                                          split_list(opt.covariate_columns));

    // region -> columns, in genotype order
    std::map<std::string, std::vector<Eigen::Index>> groups;
    if (opt.regions.empty()) {
        auto& all = groups["all"];
        for (Eigen::Index k = 0; k < cohort.genotypes.n_variants(); ++k) all.push_back(k);
    } else {
        const auto region_of = load_region_map(opt.regions);
        std::size_t unassigned = 0;
        for (Eigen::Index k = 0; k < cohort.genotypes.n_variants(); ++k) {
            const auto it = region_of.find(cohort.genotypes.variant_ids()[static_cast<std::size_t>(k)]);
            if (it == region_of.end()) {
                ++unassigned;
            } else {
                groups[it->second].push_back(k);
            }
        }
        if (unassigned > 0) {
            err << "warning: " << unassigned << " variant(s) not assigned to any region\n";
        }
        if (groups.empty()) throw InputError("no variant belongs to a region in " + opt.regions);
    }

    std::vector<std::pair<std::string, std::vector<Eigen::Index>>> jobs(groups.begin(), groups.end());
    std::vector<RegionOutcome> outcomes(jobs.size());
    std::vector<std::exception_ptr> failures(jobs.size());
    auto work = [&](std::size_t j) {
        try {
            std::string dump;
            if (!opt.dump_similarity.empty()) {
                dump = jobs.size() == 1 ? opt.dump_similarity
                                        : opt.dump_similarity + "." + jobs[j].first;
            }
            outcomes[j] = test_region(jobs[j].first, cohort, jobs[j].second, opt, wspec, sspec, dump);
        } catch (...) {
            failures[j] = std::current_exception();
        }
    };
    if (opt.threads == 1 || jobs.size() == 1) {
        for (std::size_t j = 0; j < jobs.size(); ++j) work(j);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        const auto n = std::min<std::size_t>(static_cast<std::size_t>(opt.threads), jobs.size());
        for (std::size_t t = 0; t < n; ++t) {
            pool.emplace_back([&] {
                for (std::size_t j = next++; j < jobs.size(); j = next++) work(j);
            });
        }
        for (auto& t : pool) t.join();
    }
    for (const auto& f : failures) {
        if (f) std::rethrow_exception(f);
    }

    Sink sink(opt.out, out);
    std::ostringstream provenance;
    provenance << "test method=" << opt.method << " weights=" << opt.weights;
    if (method == TestMethod::ggrf) provenance << " similarity=" << sspec.name();
    if (method == TestMethod::skat) provenance << " kernel=" << opt.kernel;
    provenance << " pheno_type=" << opt.pheno_type << " pheno_column=" << column
               << " genotypes=" << (opt.vcf.empty() ? opt.genotypes : opt.vcf)
               << " phenotype=" << opt.phenotype;
    if (!opt.covariates.empty()) provenance << " covariates=" << opt.covariates;
    if (!opt.regions.empty()) provenance << " regions=" << opt.regions;
    provenance << " n_subjects=" << cohort.phenotype.size();

    TableWriter table(sink.stream(), opt.format == "json",
                      {"region", "n_variants_input", "n_variants", "method",
                       method == TestMethod::ggrf ? "gamma_hat" : "statistic", "p_value"},
                      provenance.str());
    int status = kExitOk;
    for (const auto& o : outcomes) {
        table.row({o.region, std::to_string(o.n_input), std::to_string(o.n_used), opt.method,
                   fmt(o.statistic), fmt(o.p_value)},
                  {o.region, o.n_input, o.n_used, opt.method, rounded(o.statistic),
                   rounded(o.p_value)});
        if (!o.error.empty()) {
            err << "error: region " << o.region << ": " << o.error << '\n';
            status = kExitDegenerate;
        }
    }
    if (!opt.diagnostics.empty()) {
        std::ofstream diag(opt.diagnostics);
        if (!diag) throw InputError("cannot write '" + opt.diagnostics + "'");
        for (const auto& o : outcomes) diag << o.diagnostics.dump() << '\n';
    }
    return status;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOptions {
    std::string scenario = "null";
    std::string pheno_type = "quantitative";
    std::string weights = "beta";
    std::string similarity = "d1s";
    std::string method = "ggrf";
    std::string kernel = "ibs";
    std::string direction = "one_direction";
    int reps = 1000;
    double alpha = 0.05;
    std::uint64_t seed = 1;
    long n_subjects = 697;
    long n_variants = 508;
    long n_causal = 50;
    double effect_scale = 0.0;
    double case_fraction = 1.0 / 3.0;
    bool regenerate_genotypes = false;
    bool fix_causal_set = false;
    int threads = 1;
    std::string out = "-";
    std::string format = "tsv";
    std::string dump_pvalues;
};

int run_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err) {
    const auto started = std::chrono::steady_clock::now();
    if (opt.reps < 100) throw InputError("--reps must be at least 100");

    GenotypePopSpec pop;
    pop.n_subjects = opt.n_subjects;
    pop.n_variants = opt.n_variants;
    pop.seed = derive_seed(opt.seed, {0x706f70ULL});

    ScenarioSpec sc;
    sc.model = parse_disease_model(opt.scenario);
    sc.phenotype = parse_phenotype_kind(opt.pheno_type);
    sc.direction = parse_direction(opt.direction);
    sc.n_causal = opt.n_causal;
    sc.n_total = opt.n_variants;
    sc.effect_scale = opt.effect_scale;
    sc.target_case_fraction = opt.case_fraction;
    sc.seed = derive_seed(opt.seed, {0x7068656eULL});

    std::vector<MethodConfig> configs;
    for (const auto& m : split_list(opt.method)) {
        const TestMethod method = parse_test_method(m);
        for (const auto& w : split_list(opt.weights)) {
            MethodConfig base;
            base.method = method;
            base.weights.scheme = parse_weight_scheme(w);
            if (method == TestMethod::ggrf) {
                for (const auto& s : split_list(opt.similarity)) {
                    MethodConfig c = base;
                    c.similarity = parse_similarity(s);
                    configs.push_back(c);
                }
            } else if (method == TestMethod::skat) {
                for (const auto& k : split_list(opt.kernel)) {
                    MethodConfig c = base;
                    c.kernel = parse_kernel_kind(k);
                    configs.push_back(c);
                }
            } else {
                configs.push_back(base);
            }
        }
    }
    if (configs.empty()) throw InputError("no method configuration selected");
    std::sort(configs.begin(), configs.end(),
              [](const MethodConfig& a, const MethodConfig& b) { return a.label() < b.label(); });

    PowerOptions options;
    options.threads = opt.threads;
    options.regenerate_genotypes = opt.regenerate_genotypes;
    options.fix_causal_set = opt.fix_causal_set;
    options.keep_p_values = !opt.dump_pvalues.empty();
    const auto estimates = estimate_power_many(configs, pop, sc, opt.reps, opt.alpha, options);

    Sink sink(opt.out, out);
    std::ostringstream provenance;
    provenance << "simulate scenario=" << opt.scenario << " pheno_type=" << opt.pheno_type
               << " direction=" << opt.direction << " n_subjects=" << opt.n_subjects
               << " n_variants=" << opt.n_variants << " n_causal=" << opt.n_causal
               << " effect_scale=" << fmt(opt.effect_scale, 10)
               << " case_fraction=" << fmt(opt.case_fraction, 10) << " reps=" << opt.reps
               << " alpha=" << fmt(opt.alpha) << " seed=" << opt.seed
               << " regenerate_genotypes=" << (opt.regenerate_genotypes ? 1 : 0)
               << " fix_causal_set=" << (opt.fix_causal_set ? 1 : 0);
    TableWriter table(sink.stream(), opt.format == "json",
                      {"scenario", "method", "weights", "similarity", "pheno_type", "reps",
                       "alpha", "rejections", "rate", "ci_low", "ci_high", "redrawn"},
                      provenance.str());
    for (std::size_t i = 0; i < configs.size(); ++i) {
        const auto& c = configs[i];
        const auto& e = estimates[i];
        const std::string metric = c.method == TestMethod::ggrf ? c.similarity.name()
                                   : c.method == TestMethod::skat ? to_string(c.kernel)
                                                                  : "-";
        table.row({opt.scenario, to_string(c.method), to_string(c.weights.scheme), metric,
                   opt.pheno_type, std::to_string(e.n_replicates), fmt(e.alpha),
                   std::to_string(e.n_rejections), fmt(e.rejection_rate), fmt(e.ci_low),
                   fmt(e.ci_high), std::to_string(e.n_redrawn)},
                  {opt.scenario, to_string(c.method), to_string(c.weights.scheme), metric,
                   opt.pheno_type, e.n_replicates, rounded(e.alpha), e.n_rejections,
                   rounded(e.rejection_rate), rounded(e.ci_low), rounded(e.ci_high),
                   e.n_redrawn});
    }
    if (!opt.dump_pvalues.empty()) {
        std::ofstream dump(opt.dump_pvalues);
        if (!dump) throw InputError("cannot write '" + opt.dump_pvalues + "'");
        dump << "replicate\tconfig\tp_value\n";
        for (std::size_t i = 0; i < configs.size(); ++i) {
            for (std::size_t r = 0; r < estimates[i].p_values.size(); ++r) {
                dump << r << '\t' << configs[i].label() << '\t' << fmt(estimates[i].p_values[r])
                     << '\n';
            }
        }
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    err << "simulate: " << opt.reps << " replicates x " << configs.size()
        << " configuration(s) in " << fmt(seconds, 4) << " s\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// weights, mixture

struct WeightsOptions {
    std::string scheme = "beta";
    std::string mafs;
    bool normalize = false;
    std::string out = "-";
};

int run_weights(const WeightsOptions& opt, std::ostream& out) {
    std::vector<double> mafs;
    const bool inline_list = opt.mafs.find(',') != std::string::npos ||
                             opt.mafs.find_first_not_of("0123456789.eE+-") == std::string::npos;
    if (inline_list) {
        mafs = parse_doubles(opt.mafs);
    } else {
        std::ifstream in(opt.mafs);
        if (!in) throw InputError("cannot open '" + opt.mafs + "'");
        std::string tok;
        while (in >> tok) {
            if (tok[0] == '#') {
                std::getline(in, tok);
                continue;
            }
            const auto v = parse_doubles(tok);
            mafs.insert(mafs.end(), v.begin(), v.end());
        }
    }
    if (mafs.empty()) throw InputError("no MAF values given");
    const Eigen::VectorXd m = Eigen::Map<Eigen::VectorXd>(mafs.data(), static_cast<Eigen::Index>(mafs.size()));
    Eigen::VectorXd w = compute_weights(m, WeightSpec{parse_weight_scheme(opt.scheme)});
    if (opt.normalize) w = normalize_to_max(w);

    Sink sink(opt.out, out);
    auto& s = sink.stream();
    s << "maf\tweight\n";
    for (Eigen::Index k = 0; k < m.size(); ++k) s << fmt(m[k], 10) << '\t' << fmt(w[k], 10) << '\n';
    return kExitOk;
}

struct MixtureOptions {
    std::string lambdas;
    double q = 0.0;
    double accuracy = 1e-6;
    long draws = 1000000;
    std::uint64_t seed = 1;
    std::string out = "-";
};

int run_mixture(const MixtureOptions& opt, std::ostream& out) {
    MixtureQuery query{parse_doubles(opt.lambdas), opt.q, opt.accuracy};
    const MixtureResult analytic = mixture_sf_detail(query);
    const double mc = opt.draws > 0 ? mc_oracle(query.lambdas, opt.q, opt.draws, opt.seed)
                                     : std::numeric_limits<double>::quiet_NaN();
    Sink sink(opt.out, out);
    auto& s = sink.stream();
    s << "n_lambda\tq\tp_analytic\tapproximate\tfault\tp_monte_carlo\tn_draws\n";
    s << query.lambdas.size() << '\t' << fmt(opt.q, 10) << '\t' << fmt(analytic.p_value) << '\t'
      << (analytic.approximate ? 1 : 0) << '\t' << analytic.fault << '\t' << fmt(mc) << '\t'
      << opt.draws << '\n';
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Generalized genetic random field association tests"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("ggrf ") + kToolVersion);

    const std::vector<std::string> weight_names{"uw", "beta", "wss", "log"};
    const std::vector<std::string> formats{"tsv", "json"};

    TestOptions topt;
    auto* test = app.add_subcommand("test", "Region-based association test");
    test->add_option("--genotypes", topt.genotypes, "Genotype TSV (subjects x variants)");
    test->add_option("--vcf", topt.vcf, "Biallelic GT-only VCF");
    test->add_option("--phenotype", topt.phenotype, "Phenotype TSV")->required();
    test->add_option("--pheno-column", topt.pheno_column, "Phenotype column (default: first)");
    test->add_option("--pheno-type", topt.pheno_type)
        ->check(CLI::IsMember({"quantitative", "binary"}));
    test->add_option("--covariates", topt.covariates, "Covariate TSV");
    test->add_option("--covariate-columns", topt.covariate_columns, "Comma-separated subset");
    test->add_option("--regions", topt.regions, "variant_id -> region_id map");
    test->add_option("--method", topt.method)->check(CLI::IsMember({"ggrf", "skat", "burden"}));
    test->add_option("--weights", topt.weights)->check(CLI::IsMember(weight_names));
    test->add_option("--similarity", topt.similarity, "d1s..d4s, optional -centered suffix");
    test->add_option("--kernel", topt.kernel)->check(CLI::IsMember({"linear", "ibs"}));
    test->add_option("--out", topt.out, "Output path ('-' for stdout)");
    test->add_option("--format", topt.format)->check(CLI::IsMember(formats));
    test->add_option("--dump-similarity", topt.dump_similarity, "Write S as TSV");
    test->add_option("--diagnostics", topt.diagnostics, "Per-region JSON diagnostics");
    test->add_option("--threads", topt.threads)->check(CLI::PositiveNumber);

    SimulateOptions sopt;
    auto* sim = app.add_subcommand("simulate", "Type I error / power simulation");
    sim->add_option("--scenario", sopt.scenario)
        ->check(CLI::IsMember({"null", "s1", "s2", "s3", "s4"}));
    sim->add_option("--pheno-type", sopt.pheno_type)
        ->check(CLI::IsMember({"quantitative", "binary"}));
    sim->add_option("--weights", sopt.weights, "Comma-separated weight schemes");
    sim->add_option("--similarity", sopt.similarity, "Comma-separated similarity orders");
    sim->add_option("--method", sopt.method, "Comma-separated methods (ggrf, skat, burden)");
    sim->add_option("--kernel", sopt.kernel, "Comma-separated SKAT kernels");
    sim->add_option("--direction", sopt.direction)
        ->check(CLI::IsMember({"one_direction", "bidirection"}));
    sim->add_option("--reps", sopt.reps)->check(CLI::PositiveNumber);
    sim->add_option("--alpha", sopt.alpha)->check(CLI::Range(0.0, 1.0));
    sim->add_option("--seed", sopt.seed);
    sim->add_option("--n-subjects", sopt.n_subjects)->check(CLI::PositiveNumber);
    sim->add_option("--n-variants", sopt.n_variants)->check(CLI::PositiveNumber);
    sim->add_option("--n-causal", sopt.n_causal)->check(CLI::NonNegativeNumber);
    sim->add_option("--effect-scale", sopt.effect_scale);
    sim->add_option("--case-fraction", sopt.case_fraction)->check(CLI::Range(0.0, 1.0));
    sim->add_flag("--regenerate-genotypes", sopt.regenerate_genotypes);
    sim->add_flag("--fix-causal-set", sopt.fix_causal_set);
    sim->add_option("--threads", sopt.threads)->check(CLI::PositiveNumber);
    sim->add_option("--out", sopt.out);
    sim->add_option("--format", sopt.format)->check(CLI::IsMember(formats));
    sim->add_option("--dump-pvalues", sopt.dump_pvalues, "Per-replicate p-values (TSV)");

    WeightsOptions wopt;
    auto* weights = app.add_subcommand("weights", "Tabulate variant weights");
    weights->add_option("--scheme", wopt.scheme)->check(CLI::IsMember(weight_names));
    weights->add_option("--mafs", wopt.mafs, "File of MAFs or inline comma list")->required();
    weights->add_flag("--normalize", wopt.normalize, "Rescale so the maximum weight is 1");
    weights->add_option("--out", wopt.out);

    MixtureOptions mopt;
    auto* mixture = app.add_subcommand("mixture", "Tail of a chi-square mixture");
    mixture->add_option("--lambdas", mopt.lambdas, "Comma-separated coefficients")->required();
    mixture->add_option("--q", mopt.q, "Threshold");
    mixture->add_option("--accuracy", mopt.accuracy);
    mixture->add_option("--draws", mopt.draws, "Monte Carlo draws (0 to skip)")
        ->check(CLI::NonNegativeNumber);
    mixture->add_option("--seed", mopt.seed);
    mixture->add_option("--out", mopt.out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (*test) return run_test(topt, out, err);
        if (*sim) return run_simulate(sopt, out, err);
        if (*weights) return run_weights(wopt, out);
        if (*mixture) return run_mixture(mopt, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitInternal;
}

}  // namespace ggrf
