#pragma once

// Regularized incomplete beta, symmetric beta quantiles, the exact null law
// of the sample partial correlation, and the normal helpers used by the
// asymptotic Fisher test.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>

#include "ggm/errors.hpp"

namespace ggm {

namespace detail {

/// Continued fraction for I_x(p, q), modified Lentz. Converges quickly for
/// x < (p + 1) / (p + q + 2).
inline double beta_continued_fraction(double x, double p, double q) {
    constexpr double tiny = 1e-300;
    constexpr double eps = 1e-16;
    constexpr int max_iter = 10000;
    const double qab = p + q;
    const double qap = p + 1.0;
    const double qam = p - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (q - m) * x / ((qam + m2) * (p + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(p + m) * (qab + m) * x / ((p + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) return h;
    }
    throw DomainError("incomplete beta continued fraction did not converge");
}

inline double log_beta(double p, double q) {
    return std::lgamma(p) + std::lgamma(q) - std::lgamma(p + q);
}

}  // namespace detail

/// Throws InsufficientSample unless n > N.
inline void require_sample(std::int64_t n, std::int64_t dim) {
    if (n <= dim) {
        throw InsufficientSample("n = " + std::to_string(n) + " observations for N = " +
                                 std::to_string(dim) + " variables (need n > N)");
    }
}

/// Regularized incomplete beta I_x(p, q).
inline double reg_inc_beta(double x, double p, double q) {
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("reg_inc_beta: x must lie in [0, 1]");
    if (!(p > 0.0) || !(q > 0.0) || !std::isfinite(p) || !std::isfinite(q)) {
        throw DomainError("reg_inc_beta: shape parameters must be positive and finite");
    }
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    if (p == q && x == 0.5) return 0.5;
    const double log_front =
        p * std::log(x) + q * std::log1p(-x) - detail::log_beta(p, q);
    const double front = std::exp(log_front);
    if (x < (p + 1.0) / (p + q + 2.0)) {
        return front * detail::beta_continued_fraction(x, p, q) / p;
    }
    return 1.0 - front * detail::beta_continued_fraction(1.0 - x, q, p) / q;
}

/// Quantile of Be(m, m): the u with I_u(m, m) = prob.
///
/// Bisection down to a bracket of relative width 1e-13, then a single secant step
/// inside the bracket. Probabilities above 1/2 are reflected so that
/// q(1 - p) = 1 - q(p) holds to rounding.
inline double beta_sym_quantile(double prob, double m) {
    if (!(prob > 0.0 && prob < 1.0)) throw DomainError("beta_sym_quantile: prob must lie in (0, 1)");
    if (!(m > 0.0) || !std::isfinite(m)) throw DomainError("beta_sym_quantile: shape must be positive");
    if (prob == 0.5) return 0.5;
    if (prob > 0.5) return 1.0 - beta_sym_quantile(1.0 - prob, m);

    double lo = 0.0;
    double hi = 0.5;
    double f_lo = -prob;
    double f_hi = 0.5 - prob;
    for (int it = 0; it < 2000 && hi - lo > 1e-13 * hi && hi > 1e-300; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = reg_inc_beta(mid, m, m) - prob;
        if (f_mid == 0.0) return mid;
        if (f_mid < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    if (f_hi == f_lo) return 0.5 * (lo + hi);
    const double x = lo - f_lo * (hi - lo) / (f_hi - f_lo);
    return (x > lo && x < hi) ? x : 0.5 * (lo + hi);
}

/// Shape of the symmetric beta law of (1 + r) / 2 under independence.
inline double null_shape(std::int64_t n, std::int64_t dim) {
    require_sample(n, dim);
    return 0.5 * static_cast<double>(n - dim);
}

/// (1 - alpha/2)-quantile of the null law of the sample partial correlation:
/// 1 - 2 * beta_sym_quantile(alpha / 2, (n - N) / 2).
inline double null_corr_quantile(double alpha, std::int64_t n, std::int64_t dim) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("null_corr_quantile: alpha must lie in (0, 1]");
    const double m = null_shape(n, dim);
    return 1.0 - 2.0 * beta_sym_quantile(0.5 * alpha, m);
}

/// CDF of the null law of the sample partial correlation.
inline double null_corr_cdf(double r, std::int64_t n, std::int64_t dim) {
    const double m = null_shape(n, dim);
    if (!(r >= -1.0 && r <= 1.0)) throw DomainError("null_corr_cdf: r must lie in [-1, 1]");
    return reg_inc_beta(0.5 * (1.0 + r), m, m);
}

/// Fisher statistic (sqrt(n) / 2) ln((1 + r) / (1 - r)).
inline double fisher_z(double r, std::int64_t n) {
    if (!(std::abs(r) < 1.0)) throw DomainError("fisher_z: |r| must be < 1");
    if (n < 1) throw DomainError("fisher_z: n must be positive");
    return std::sqrt(static_cast<double>(n)) * std::atanh(r);
}

inline double std_normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

/// Upper tail 1 - Phi(z), accurate far into the tail.
inline double std_normal_sf(double z) {
    return 0.5 * std::erfc(z / std::numbers::sqrt2);
}

/// Inverse normal CDF: Acklam's rational approximation followed by one Halley
/// step against the erfc-based CDF.
inline double std_normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("std_normal_quantile: p must lie in (0, 1)");
    if (p == 0.5) return 0.0;

    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    // Phi(x) - p, evaluated through the survival function above the median
    // so that the upper tail keeps its digits.
    const double err = (p < 0.5) ? std_normal_cdf(x) - p : (1.0 - p) - std_normal_sf(x);
    const double u = err * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

}  // namespace ggm
