#pragma once

#include <string>

#include <Eigen/Dense>

namespace ggrf {

/// MAF-based variant weighting schemes.
///   uw   : 1
///   beta : Beta(maf; a, b) density, squared
///   wss  : 1 / (maf (1 - maf))
///   log  : -log10(maf)
enum class WeightScheme { uw, beta, wss, log };

std::string to_string(WeightScheme scheme);
WeightScheme parse_weight_scheme(const std::string& name);

struct WeightSpec {
    WeightScheme scheme = WeightScheme::uw;
    double beta_shape1 = 1.0;
    double beta_shape2 = 25.0;

    void validate() const;
};

double beta_density(double x, double shape1, double shape2);

/// Elementwise weights for a vector of MAFs in [0, 0.5]. WSS and LOG
/// reject MAF = 0 with a DegenerateError.
Eigen::VectorXd compute_weights(const Eigen::VectorXd& mafs, const WeightSpec& spec);

/// Rescale so the largest weight is 1 (plotting only).
Eigen::VectorXd normalize_to_max(const Eigen::VectorXd& weights);

}  // namespace ggrf
