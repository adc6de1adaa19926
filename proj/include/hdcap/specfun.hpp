#pragma once

// Special functions shared by the PSK and OOFSK formulas. Everything here is
// pure and safe to call concurrently.

#include <hdcap/errors.hpp>
#include <hdcap/numeric.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace hdcap {

namespace specfun_detail {

inline void require(bool ok, const char* what) {
    if (!ok) throw DomainError(what);
}

}  // namespace specfun_detail

/// Upper tail of the standard normal, computed through erfc so neither tail
/// suffers from 1 - CDF cancellation. Infinite arguments map to their limits.
inline double gaussian_q(double x) {
    specfun_detail::require(!std::isnan(x), "gaussian_q: NaN argument");
    return 0.5 * std::erfc(x * 0.70710678118654752440);
}

/// Below this argument log I0 uses the power series; at or above, the
/// Hankel asymptotic expansion.
inline constexpr double kBesselI0SeriesLimit = 15.0;

/// ln I0(x) for x >= 0, finite for every finite x (no overflow near 700).
inline double log_bessel_i0(double x) {
    specfun_detail::require(x >= 0.0, "log_bessel_i0: negative argument");
    if (std::isinf(x)) return x;
    if (x < kBesselI0SeriesLimit) {
        const double q = 0.25 * x * x;
        double term = 1.0;
        double sum = 1.0;
        for (int k = 1; k < 200; ++k) {
            term *= q / (static_cast<double>(k) * k);
            sum += term;
            if (term < 1e-17 * sum) break;
        }
        return std::log(sum);
    }
    // I0(x) ~ e^x / sqrt(2 pi x) * sum_k ((2k-1)!!)^2 / (k! (8x)^k); terms shrink
    // until k ~ 2x, so at x >= 15 truncation error is far below double precision.
    const double z = 1.0 / (8.0 * x);
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 60; ++k) {
        const double next = term * (2.0 * k - 1.0) * (2.0 * k - 1.0) * z / k;
        if (next > term) break;
        term = next;
        sum += term;
        if (term < 1e-17 * sum) break;
    }
    return x - 0.5 * std::log(2.0 * numeric::kPi * x) + std::log(sum);
}

/// Inverse of log I0: returns x >= 0 with log_bessel_i0(x) == log_y. Takes the
/// logarithm so arguments such as e^{alpha^2} never have to be formed.
inline double bessel_i0_inv_log(double log_y) {
    specfun_detail::require(log_y >= 0.0, "bessel_i0_inv_log: argument below ln I0(0) = 0");
    if (log_y == 0.0) return 0.0;
    if (std::isinf(log_y)) return log_y;
    // ln I0(x) <= min(x, x^2/4), so the root is at least max(log_y, 2 sqrt(log_y)).
    const double lo = std::max(log_y, 2.0 * std::sqrt(log_y));
    const auto g = [log_y](double x) { return log_bessel_i0(x) - log_y; };
    const double hi = numeric::expand_upper_bracket(
        [](double x) { return log_bessel_i0(x); }, log_y, lo + 1.0);
    return numeric::solve_bracketed(g, lo, hi, 52);
}

/// Above this max(a, b) the Marcum function switches from the Poisson-mixture
/// series to the normal approximation Q((b - a) - 1/(2a)); the approximation
/// error there is O(1/a^2), below 1e-6.
inline constexpr double kMarcumSeriesLimit = 1000.0;

struct MarcumPair {
    double q;           ///< Q1(a, b)
    double complement;  ///< 1 - Q1(a, b), accurate when small
};

/// First-order Marcum Q function together with its complement.
///
/// Uses the Bessel series e^{-(a^2+b^2)/2} sum (a/b)^k I_k(ab), regrouped as a
/// Poisson mixture: with K ~ Poisson(a^2/2) and X ~ Poisson(b^2/2) independent,
/// Q1(a, b) = P(X <= K). Both P(X <= K) and P(X > K) are sums of positive terms,
/// so each tail keeps relative accuracy. Only a window of +-15 standard
/// deviations around the two Poisson means contributes.
inline MarcumPair marcum_q1_pair(double a, double b) {
    specfun_detail::require(a >= 0.0 && b >= 0.0, "marcum_q1: negative argument");
    specfun_detail::require(!std::isnan(a) && !std::isnan(b), "marcum_q1: NaN argument");
    if (b == 0.0) return {1.0, 0.0};
    if (std::isinf(b)) return {0.0, 1.0};
    if (a == 0.0) {
        const double h = -0.5 * b * b;
        return {std::exp(h), -std::expm1(h)};
    }
    if (std::isinf(a)) return {1.0, 0.0};
    if (b - a > 40.0) return {0.0, 1.0};
    if (a - b > 40.0) return {1.0, 0.0};
    if (std::max(a, b) > kMarcumSeriesLimit) {
        const double z = (b - a) - 0.5 / a;
        return {gaussian_q(z), gaussian_q(-z)};
    }

    const double lam = 0.5 * a * a;
    const double xm = 0.5 * b * b;
    const double width = 15.0 * std::sqrt(std::max(lam, xm)) + 30.0;
    const auto lo = static_cast<long>(std::max(0.0, std::floor(std::min(lam, xm) - width)));
    const auto hi = static_cast<long>(std::ceil(std::max(lam, xm) + width));
    const auto n = static_cast<std::size_t>(hi - lo + 1);

    thread_local std::vector<double> pk;
    thread_local std::vector<double> px;
    pk.resize(n);
    px.resize(n);
    const double log_lam = std::log(lam);
    const double log_xm = std::log(xm);
    double lpk = -lam + lo * log_lam - std::lgamma(lo + 1.0);
    double lpx = -xm + lo * log_xm - std::lgamma(lo + 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        pk[i] = std::exp(lpk);
        px[i] = std::exp(lpx);
        const double kp1 = static_cast<double>(lo + static_cast<long>(i) + 1);
        const double lk = std::log(kp1);
        lpk += log_lam - lk;
        lpx += log_xm - lk;
    }

    // Q1 = sum_k P(K=k) P(X<=k); complement = sum_k P(K=k) P(X>k).
    numeric::CompensatedSum q;
    double cdf_x = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cdf_x += px[i];
        q.add(pk[i] * cdf_x);
    }
    numeric::CompensatedSum c;
    double tail_x = 0.0;
    for (std::size_t i = n; i-- > 0;) {
        c.add(pk[i] * tail_x);
        tail_x += px[i];
    }
    const double qv = q.value();
    const double cv = c.value();
    const double total = qv + cv;
    if (!(total > 0.0)) {
        // Both tails underflowed: the answer is decided by which mean dominates.
        return b > a ? MarcumPair{0.0, 1.0} : MarcumPair{1.0, 0.0};
    }
    return {qv / total, cv / total};
}

inline double marcum_q1(double a, double b) { return marcum_q1_pair(a, b).q; }

/// 1 - Q1(a, b) without cancellation.
inline double marcum_q1_complement(double a, double b) {
    return marcum_q1_pair(a, b).complement;
}

/// Binary entropy in nats, 0 ln 0 := 0.
inline double binary_entropy(double p) {
    specfun_detail::require(p >= 0.0 && p <= 1.0, "binary_entropy: probability outside [0, 1]");
    const auto plogp = [](double v) { return v > 0.0 ? -v * std::log(v) : 0.0; };
    return plogp(p) + plogp(1.0 - p);
}

}  // namespace hdcap
