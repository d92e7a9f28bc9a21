#include "ggrf/weights.hpp"

#include <cmath>

#include "ggrf/error.hpp"

namespace ggrf {

std::string to_string(WeightScheme scheme) {
    switch (scheme) {
        case WeightScheme::uw: return "uw";
        case WeightScheme::beta: return "beta";
        case WeightScheme::wss: return "wss";
        case WeightScheme::log: return "log";
    }
    return "?";
}

WeightScheme parse_weight_scheme(const std::string& name) {
    if (name == "uw" || name == "UW") return WeightScheme::uw;
    if (name == "beta" || name == "BETA") return WeightScheme::beta;
    if (name == "wss" || name == "WSS") return WeightScheme::wss;
    if (name == "log" || name == "LOG") return WeightScheme::log;
    throw InputError("unknown weight scheme '" + name + "' (expected uw|beta|wss|log)");
}

void WeightSpec::validate() const {
    if (!(beta_shape1 > 0.0) || !(beta_shape2 > 0.0)) {
        throw InputError("beta weight shapes must be positive");
    }
}

double beta_density(double x, double shape1, double shape2) {
    const double log_norm =
        std::lgamma(shape1 + shape2) - std::lgamma(shape1) - std::lgamma(shape2);
    // pow keeps the x = 0, shape1 = 1 corner exact (0^0 = 1)
    return std::exp(log_norm) * std::pow(x, shape1 - 1.0) * std::pow(1.0 - x, shape2 - 1.0);
}

Eigen::VectorXd compute_weights(const Eigen::VectorXd& mafs, const WeightSpec& spec) {
    spec.validate();
    Eigen::VectorXd w(mafs.size());
    for (Eigen::Index k = 0; k < mafs.size(); ++k) {
        const double maf = mafs[k];
        if (!(maf >= 0.0 && maf <= 0.5)) {
            throw InputError("MAF " + std::to_string(maf) + " outside [0, 0.5]");
        }
        if (maf == 0.0 && (spec.scheme == WeightScheme::wss || spec.scheme == WeightScheme::log)) {
            throw DegenerateError(to_string(spec.scheme) +
                                  " weight diverges at MAF = 0; filter monomorphic variants first");
        }
        switch (spec.scheme) {
            case WeightScheme::uw: w[k] = 1.0; break;
            case WeightScheme::beta: {
                const double d = beta_density(maf, spec.beta_shape1, spec.beta_shape2);
                w[k] = d * d;
                break;
            }
            case WeightScheme::wss: w[k] = 1.0 / (maf * (1.0 - maf)); break;
            case WeightScheme::log: w[k] = -std::log10(maf); break;
        }
    }
    return w;
}

Eigen::VectorXd normalize_to_max(const Eigen::VectorXd& weights) {
    const double m = weights.size() > 0 ? weights.maxCoeff() : 0.0;
    if (!(m > 0.0)) return weights;
    return weights / m;
}

}  // namespace ggrf
