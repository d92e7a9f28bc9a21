#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace ggrf {

/// Q = sum_k lambda_k Z_k^2, Z_k iid N(0, 1); lambdas may be signed.
struct MixtureQuery {
    std::vector<double> lambdas;
    double threshold_q = 0.0;
    double accuracy = 1e-6;

    void validate() const;
};

struct MixtureResult {
    double p_value = 1.0;
    /// True when the characteristic-function inversion failed and the
    /// three-cumulant approximation was used instead.
    bool approximate = false;
    /// Davies fault code: 0 ok, 1 accuracy not reached, 2 round-off may be
    /// significant, 3 invalid parameters, 4 integration parameters not found.
    int fault = 0;
    int integration_terms = 0;
};

/// Options for the characteristic-function inversion.
struct DaviesOptions {
    int term_limit = 100000;
};

/// P(Q > threshold_q).
double mixture_sf(const MixtureQuery& query);
MixtureResult mixture_sf_detail(const MixtureQuery& query, const DaviesOptions& options = {});

/// Davies' inversion only, returning P(Q < c) and the fault code. Exposed
/// for testing.
MixtureResult davies_cdf(const std::vector<double>& lambdas, double c, double accuracy,
                         int term_limit);

/// Three-cumulant (shifted, scaled chi-square) approximation of P(Q > q).
double cumulant_approximation_sf(const std::vector<double>& lambdas, double q);

/// Monte Carlo estimate of P(Q > q) from n_draws seeded draws.
double mc_oracle(const std::vector<double>& lambdas, double q, std::int64_t n_draws,
                 std::uint64_t seed);

/// Same draws evaluated at several thresholds.
std::vector<double> mc_oracle(const std::vector<double>& lambdas, const std::vector<double>& qs,
                              std::int64_t n_draws, std::uint64_t seed);

}  // namespace ggrf
