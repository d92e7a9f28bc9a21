#include "ggrf/chisq_mixture.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "ggrf/error.hpp"

namespace ggrf {

void MixtureQuery::validate() const {
    if (lambdas.empty()) throw InputError("mixture needs at least one coefficient");
    if (!(accuracy > 0.0 && accuracy <= 1e-2)) {
        throw InputError("mixture accuracy must lie in (0, 1e-2]");
    }
    for (const double l : lambdas) {
        if (!std::isfinite(l)) throw InputError("mixture coefficients must be finite");
    }
    if (!std::isfinite(threshold_q)) throw InputError("mixture threshold must be finite");
}

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLog28 = 0.0866;  // log(2) / 8

double exp1(double x) { return x < -50.0 ? 0.0 : std::exp(x); }
double square(double x) { return x * x; }
double cube(double x) { return x * x * x; }

/// log(1 + x) if first, else log(1 + x) - x; series near zero.
double log1(double x, bool first) {
    if (std::abs(x) > 0.1) return first ? std::log(1.0 + x) : (std::log(1.0 + x) - x);
    double y = x / (2.0 + x);
    double term = 2.0 * cube(y);
    double k = 3.0;
    double s = (first ? 2.0 : -x) * y;
    y = square(y);
    for (double s1 = s + term / k; s1 != s; s1 = s + term / k) {
        k += 2.0;
        term *= y;
        s = s1;
    }
    return s;
}

struct TermLimitReached {};

/// Characteristic-function inversion for the distribution of
///   Q = sum_j lb_j chi2(n_j, nc_j) + sigma N(0, 1),
/// after R. B. Davies (1980), Algorithm AS 155. All state lives in the
/// object so concurrent evaluations do not interact.
class DaviesIntegrator {
public:
    DaviesIntegrator(std::vector<double> lb, std::vector<double> nc, std::vector<int> n,
                     double sigma, double c, int lim)
        : lb_(std::move(lb)), nc_(std::move(nc)), n_(std::move(n)),
          r_(static_cast<int>(lb_.size())), lim_(lim), c_(c), sigma_(sigma),
          th_(lb_.size()) {}

    MixtureResult run(double acc) {
        MixtureResult result;
        result.fault = 0;
        try {
            result.p_value = evaluate(acc, result.fault);
        } catch (const TermLimitReached&) {
            result.fault = 4;
            result.p_value = -1.0;
        }
        result.integration_terms = static_cast<int>(terms_);
        return result;
    }

private:
    void counter() {
        if (++count_ > lim_) throw TermLimitReached{};
    }

    void order() {
        for (int j = 0; j < r_; ++j) {
            const double lj = std::abs(lb_[j]);
            int k = j - 1;
            for (; k >= 0; --k) {
                if (lj > std::abs(lb_[th_[k]])) {
                    th_[k + 1] = th_[k];
                } else {
                    break;
                }
            }
            th_[k + 1] = j;
        }
        ndtsrt_ = false;
    }

    /// Bound on tail probability using the mgf; cutoff returned in cx.
    double errbd(double u, double& cx) {
        counter();
        double xconst = u * sigsq_;
        double sum1 = u * xconst;
        u *= 2.0;
        for (int j = r_ - 1; j >= 0; --j) {
            const int nj = n_[j];
            const double lj = lb_[j];
            const double ncj = nc_[j];
            const double x = u * lj;
            const double y = 1.0 - x;
            xconst += lj * (ncj / y + nj) / y;
            sum1 += ncj * square(x / y) + nj * (square(x) / y + log1(-x, false));
        }
        cx = xconst;
        return exp1(-0.5 * sum1);
    }

    /// Find c so that P(Q > c) < accx if upn > 0, P(Q < c) < accx otherwise.
    double ctff(double accx, double& upn) {
        double u2 = upn;
        double u1 = 0.0;
        double c1 = mean_;
        double c2 = 0.0;
        double xconst = 0.0;
        const double rb = 2.0 * ((u2 > 0.0) ? lmax_ : lmin_);
        for (double u = u2 / (1.0 + u2 * rb); errbd(u, c2) > accx; u = u2 / (1.0 + u2 * rb)) {
            u1 = u2;
            c1 = c2;
            u2 *= 2.0;
        }
        for (double u = (c1 - mean_) / (c2 - mean_); u < 0.9; u = (c1 - mean_) / (c2 - mean_)) {
            u = (u1 + u2) / 2.0;
            if (errbd(u / (1.0 + u * rb), xconst) > accx) {
                u1 = u;
                c1 = xconst;
            } else {
                u2 = u;
                c2 = xconst;
            }
        }
        upn = u2;
        return c2;
    }

    /// Bound on integration error due to truncation at u.
    double truncation(double u, double tausq) {
        counter();
        double sum1 = 0.0;
        double prod2 = 0.0;
        double prod3 = 0.0;
        int s = 0;
        const double sum2 = (sigsq_ + tausq) * square(u);
        double prod1 = 2.0 * sum2;
        u *= 2.0;
        for (int j = 0; j < r_; ++j) {
            const double lj = lb_[j];
            const double ncj = nc_[j];
            const int nj = n_[j];
            const double x = square(u * lj);
            sum1 += ncj * x / (1.0 + x);
            if (x > 1.0) {
                prod2 += nj * std::log(x);
                prod3 += nj * log1(x, true);
                s += nj;
            } else {
                prod1 += nj * log1(x, true);
            }
        }
        sum1 *= 0.5;
        prod2 += prod1;
        prod3 += prod1;
        double x = exp1(-sum1 - 0.25 * prod2) / kPi;
        const double y = exp1(-sum1 - 0.25 * prod3) / kPi;
        double err1 = (s == 0) ? 1.0 : x * 2.0 / s;
        double err2 = (prod3 > 1.0) ? 2.5 * y : 1.0;
        if (err2 < err1) err1 = err2;
        x = 0.5 * sum2;
        err2 = (x <= y) ? 1.0 : y / x;
        return (err1 < err2) ? err1 : err2;
    }

    /// Find u with truncation(u) < accx and truncation(u / 1.2) > accx.
    void findu(double& utx, double accx) {
        static constexpr double divis[] = {2.0, 1.4, 1.2, 1.1};
        double ut = utx;
        double u = ut / 4.0;
        if (truncation(u, 0.0) > accx) {
            for (u = ut; truncation(u, 0.0) > accx; u = ut) ut *= 4.0;
        } else {
            ut = u;
            for (u = u / 4.0; truncation(u, 0.0) <= accx; u = u / 4.0) ut = u;
        }
        for (const double d : divis) {
            u = ut / d;
            if (truncation(u, 0.0) <= accx) ut = u;
        }
        utx = ut;
    }

    /// Integration with nterm terms at step interv. If !mainx the
    /// integrand is multiplied by 1 - exp(-tausq u^2 / 2).
    void integrate(int nterm, double interv, double tausq, bool mainx) {
        const double inpi = interv / kPi;
        for (int k = nterm; k >= 0; --k) {
            const double u = (k + 0.5) * interv;
            double sum1 = -2.0 * u * c_;
            double sum2 = std::abs(sum1);
            double sum3 = -0.5 * sigsq_ * square(u);
            for (int j = r_ - 1; j >= 0; --j) {
                const int nj = n_[j];
                const double x = 2.0 * lb_[j] * u;
                double y = square(x);
                sum3 -= 0.25 * nj * log1(y, true);
                y = nc_[j] * x / (1.0 + y);
                const double z = nj * std::atan(x) + y;
                sum1 += z;
                sum2 += std::abs(z);
                sum3 -= 0.5 * x * y;
            }
            double x = inpi * exp1(sum3) / u;
            if (!mainx) x *= 1.0 - exp1(-0.5 * tausq * square(u));
            sum1 = std::sin(0.5 * sum1) * x;
            sum2 = 0.5 * sum2 * x;
            intl_ += sum1;
            ersm_ += sum2;
        }
    }

    /// Coefficient of tausq in the error when the convergence factor
    /// exp(-tausq u^2 / 2) is used at x.
    double cfe(double x) {
        counter();
        if (ndtsrt_) order();
        double axl = std::abs(x);
        const double sxl = (x > 0.0) ? 1.0 : -1.0;
        double sum1 = 0.0;
        for (int j = r_ - 1; j >= 0; --j) {
            const int t = th_[j];
            if (lb_[t] * sxl > 0.0) {
                const double lj = std::abs(lb_[t]);
                const double axl1 = axl - lj * (n_[t] + nc_[t]);
                const double axl2 = lj / kLog28;
                if (axl1 > axl2) {
                    axl = axl1;
                } else {
                    if (axl > axl2) axl = axl2;
                    sum1 = (axl - axl1) / lj;
                    for (int k = j - 1; k >= 0; --k) sum1 += n_[th_[k]] + nc_[th_[k]];
                    break;
                }
            }
        }
        if (sum1 > 100.0) {
            fail_ = true;
            return 1.0;
        }
        return std::pow(2.0, sum1 / 4.0) / (kPi * square(axl));
    }

    double evaluate(double acc, int& fault) {
        static constexpr int rats[] = {1, 2, 4, 8};
        double acc1 = acc;
        double xlim = static_cast<double>(lim_);

        sigsq_ = square(sigma_);
        double sd = sigsq_;
        for (int j = 0; j < r_; ++j) {
            const int nj = n_[j];
            const double lj = lb_[j];
            const double ncj = nc_[j];
            if (nj < 0 || ncj < 0.0) {
                fault = 3;
                return -1.0;
            }
            sd += square(lj) * (2 * nj + 4.0 * ncj);
            mean_ += lj * (nj + ncj);
            if (lmax_ < lj) {
                lmax_ = lj;
            } else if (lmin_ > lj) {
                lmin_ = lj;
            }
        }
        if (sd == 0.0) return (c_ > 0.0) ? 1.0 : 0.0;
        if (lmin_ == 0.0 && lmax_ == 0.0 && sigma_ == 0.0) {
            fault = 3;
            return -1.0;
        }
        sd = std::sqrt(sd);
        const double almx = (lmax_ < -lmin_) ? -lmin_ : lmax_;

        double utx = 16.0 / sd;
        double up = 4.5 / sd;
        double un = -up;
        findu(utx, 0.5 * acc1);
        if (c_ != 0.0 && almx > 0.07 * sd) {
            const double tausq = 0.25 * acc1 / cfe(c_);
            if (fail_) {
                fail_ = false;
            } else if (truncation(utx, tausq) < 0.2 * acc1) {
                sigsq_ += tausq;
                findu(utx, 0.25 * acc1);
            }
        }
        acc1 *= 0.5;

        double intv = 0.0;
        double xnt = 0.0;
        while (true) {
            // range of the distribution; quit if c is outside it
            const double d1 = ctff(acc1, up) - c_;
            if (d1 < 0.0) return 1.0;
            const double d2 = c_ - ctff(acc1, un);
            if (d2 < 0.0) return 0.0;
            intv = 2.0 * kPi / ((d1 > d2) ? d1 : d2);
            xnt = utx / intv;
            const double xntm = 3.0 / std::sqrt(acc1);
            if (xnt <= xntm * 1.5) break;

            // auxiliary integration with a convergence factor
            if (xntm > xlim) {
                fault = 1;
                return -1.0;
            }
            const int ntm = static_cast<int>(std::floor(xntm + 0.5));
            const double intv1 = utx / ntm;
            const double x = 2.0 * kPi / intv1;
            if (x <= std::abs(c_)) break;
            const double tausq = 0.33 * acc1 / (1.1 * (cfe(c_ - x) + cfe(c_ + x)));
            if (fail_) break;
            acc1 *= 0.67;
            integrate(ntm, intv1, tausq, false);
            xlim -= xntm;
            sigsq_ += tausq;
            terms_ += ntm + 1;
            findu(utx, 0.25 * acc1);
            acc1 *= 0.75;
        }

        // main integration
        if (xnt > xlim) {
            fault = 1;
            return -1.0;
        }
        const int nt = static_cast<int>(std::floor(xnt + 0.5));
        integrate(nt, intv, 0.0, true);
        terms_ += nt + 1;
        const double qfval = 0.5 - intl_;

        // round-off check, allowing for radix 8 or 16 machines
        const double upper = ersm_;
        const double x = upper + acc / 10.0;
        for (const int rat : rats) {
            if (rat * x == rat * upper) fault = 2;
        }
        return qfval;
    }

    std::vector<double> lb_;
    std::vector<double> nc_;
    std::vector<int> n_;
    int r_;
    int lim_;
    double c_;
    double sigma_;
    std::vector<int> th_;

    double sigsq_ = 0.0;
    double lmax_ = 0.0;
    double lmin_ = 0.0;
    double mean_ = 0.0;
    double intl_ = 0.0;
    double ersm_ = 0.0;
    int count_ = 0;
    long terms_ = 0;
    bool ndtsrt_ = true;
    bool fail_ = false;
};

}  // namespace

MixtureResult davies_cdf(const std::vector<double>& lambdas, double c, double accuracy,
                         int term_limit) {
    DaviesIntegrator integrator(lambdas, std::vector<double>(lambdas.size(), 0.0),
                                std::vector<int>(lambdas.size(), 1), 0.0, c, term_limit);
    return integrator.run(accuracy);
}

double cumulant_approximation_sf(const std::vector<double>& lambdas, double q) {
    // kappa_m = 2^(m-1) (m-1)! sum lambda^m
    double s1 = 0.0;
    double s2 = 0.0;
    double s3 = 0.0;
    for (const double l : lambdas) {
        s1 += l;
        s2 += l * l;
        s3 += l * l * l;
    }
    const double k1 = s1;
    const double k2 = 2.0 * s2;
    const double k3 = 8.0 * s3;
    if (!(k2 > 0.0)) return q < k1 ? 1.0 : 0.0;
    const double skew = k3 / std::pow(k2, 1.5);
    if (std::abs(skew) < 1e-8) {
        const boost::math::normal_distribution<double> normal(k1, std::sqrt(k2));
        return boost::math::cdf(boost::math::complement(normal, q));
    }
    // Q ~ a chi2(nu) + b: k2 = 2 a^2 nu, k3 = 8 a^3 nu
    const double a = k3 / (4.0 * k2);
    const double nu = 8.0 * k2 * k2 * k2 / (k3 * k3);
    const double b = k1 - a * nu;
    const double x = (q - b) / a;
    const boost::math::chi_squared_distribution<double> chi2(nu);
    if (a > 0.0) {
        if (x <= 0.0) return 1.0;
        return boost::math::cdf(boost::math::complement(chi2, x));
    }
    // negative skew: Q > q  <=>  chi2 < x
    if (x <= 0.0) return 0.0;
    return boost::math::cdf(chi2, x);
}

MixtureResult mixture_sf_detail(const MixtureQuery& query, const DaviesOptions& options) {
    query.validate();
    std::vector<double> lambdas;
    lambdas.reserve(query.lambdas.size());
    for (const double l : query.lambdas) {
        if (l != 0.0) lambdas.push_back(l);
    }
    MixtureResult result;
    if (lambdas.empty()) {
        result.p_value = query.threshold_q < 0.0 ? 1.0 : 0.0;
        return result;
    }
    const bool all_positive =
        std::all_of(lambdas.begin(), lambdas.end(), [](double l) { return l > 0.0; });
    const bool all_negative =
        std::all_of(lambdas.begin(), lambdas.end(), [](double l) { return l < 0.0; });
    if ((all_positive && query.threshold_q <= 0.0) || (all_negative && query.threshold_q >= 0.0)) {
        result.p_value = all_positive ? 1.0 : 0.0;
        return result;
    }

    const MixtureResult cdf =
        davies_cdf(lambdas, query.threshold_q, query.accuracy, options.term_limit);
    result.fault = cdf.fault;
    result.integration_terms = cdf.integration_terms;
    const bool usable = (cdf.fault == 0 || cdf.fault == 2) && cdf.p_value >= -query.accuracy &&
                        cdf.p_value <= 1.0 + query.accuracy;
    if (usable) {
        result.p_value = std::clamp(1.0 - cdf.p_value, 0.0, 1.0);
    } else {
        result.p_value = cumulant_approximation_sf(lambdas, query.threshold_q);
        result.approximate = true;
    }
    return result;
}

double mixture_sf(const MixtureQuery& query) { return mixture_sf_detail(query).p_value; }

std::vector<double> mc_oracle(const std::vector<double>& lambdas, const std::vector<double>& qs,
                              std::int64_t n_draws, std::uint64_t seed) {
    if (lambdas.empty()) throw InputError("mixture needs at least one coefficient");
    if (n_draws < 10000) throw InputError("Monte Carlo oracle needs at least 10^4 draws");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<std::int64_t> exceed(qs.size(), 0);
    for (std::int64_t d = 0; d < n_draws; ++d) {
        double q = 0.0;
        for (const double l : lambdas) {
            const double z = normal(rng);
            q += l * z * z;
        }
        for (std::size_t t = 0; t < qs.size(); ++t) {
            if (q > qs[t]) ++exceed[t];
        }
    }
    std::vector<double> out(qs.size());
    for (std::size_t t = 0; t < qs.size(); ++t) {
        out[t] = static_cast<double>(exceed[t]) / static_cast<double>(n_draws);
    }
    return out;
}

double mc_oracle(const std::vector<double>& lambdas, double q, std::int64_t n_draws,
                 std::uint64_t seed) {
    return mc_oracle(lambdas, std::vector<double>{q}, n_draws, seed).front();
}

}  // namespace ggrf
