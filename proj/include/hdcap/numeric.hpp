#pragma once

#include <hdcap/errors.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <sstream>
#include <utility>
#include <vector>

namespace hdcap::numeric {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kLn2 = 0.69314718055994530942;
inline constexpr double kLog2e = 1.44269504088896340736;

/// Neumaier compensated accumulator.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    [[nodiscard]] double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

struct QuadratureResult {
    double value;
    double error;
};

namespace detail {

struct Panel {
    double a;
    double b;
    double value;
    double error;
    double l1;
    unsigned depth;
};

/// One 15-point Kronrod panel with its embedded 7-point Gauss estimate.
template <class F>
Panel gk15_panel(F& f, double a, double b, unsigned depth) {
    using kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;
    using gauss = boost::math::quadrature::gauss<double, 7>;
    const auto& x = kronrod::abscissa();
    const auto& wk = kronrod::weights();
    const auto& wg = gauss::weights();
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double f0 = f(mid);
    double k = f0 * wk[0];
    double g = f0 * wg[0];
    double l1 = std::abs(f0) * wk[0];
    for (std::size_t i = 1; i < x.size(); ++i) {
        const double fp = f(mid + half * x[i]);
        const double fm = f(mid - half * x[i]);
        k += (fp + fm) * wk[i];
        l1 += (std::abs(fp) + std::abs(fm)) * wk[i];
        // even-indexed Kronrod nodes are the Gauss nodes
        if (i % 2 == 0) g += (fp + fm) * wg[i / 2];
    }
    return {a, b, k * half, std::abs(k - g) * std::abs(half), l1 * std::abs(half), depth};
}

}  // namespace detail

/// Globally adaptive 15-point Gauss-Kronrod on [a, b]: the panel with the
/// largest error is bisected until the total error is below
/// max(abs_tol, rel_tol * L1). Panels are not split beyond `max_depth`
/// bisections; if the target is still missed a NumericError is thrown.
template <class F>
QuadratureResult integrate(F&& f, double a, double b, double abs_tol, double rel_tol,
                           unsigned max_depth = 40) {
    if (a == b) {
        return {0.0, 0.0};
    }
    constexpr std::size_t kMaxPanels = 20000;
    const auto worse = [](const detail::Panel& x, const detail::Panel& y) { return x.error < y.error; };
    std::vector<detail::Panel> heap{detail::gk15_panel(f, a, b, 0)};
    std::vector<detail::Panel> done;
    const auto totals = [&] {
        CompensatedSum value;
        double error = 0.0;
        double l1 = 0.0;
        for (const auto* set : {&heap, &done}) {
            for (const auto& p : *set) {
                value.add(p.value);
                error += p.error;
                l1 += p.l1;
            }
        }
        return std::array<double, 3>{value.value(), error, l1};
    };
    double error = heap.front().error;
    double l1 = heap.front().l1;
    while (!heap.empty() && heap.size() + done.size() < kMaxPanels) {
        if (error <= std::max(abs_tol, rel_tol * l1)) {
            // the running sums drift, so confirm with exact totals before stopping
            const auto t = totals();
            error = t[1];
            l1 = t[2];
            if (error <= std::max(abs_tol, rel_tol * l1)) break;
        }
        std::pop_heap(heap.begin(), heap.end(), worse);
        const detail::Panel p = heap.back();
        heap.pop_back();
        const double mid = 0.5 * (p.a + p.b);
        if (p.depth >= max_depth || !(mid > std::min(p.a, p.b) && mid < std::max(p.a, p.b))) {
            done.push_back(p);
            continue;
        }
        for (const auto& child : {detail::gk15_panel(f, p.a, mid, p.depth + 1),
                                  detail::gk15_panel(f, mid, p.b, p.depth + 1)}) {
            heap.push_back(child);
            std::push_heap(heap.begin(), heap.end(), worse);
            error += child.error;
            l1 += child.l1;
        }
        error -= p.error;
        l1 -= p.l1;
        // running sums drift; refresh them now and then
        if ((heap.size() + done.size()) % 256 == 0) {
            const auto t = totals();
            error = t[1];
            l1 = t[2];
        }
    }
    const auto t = totals();
    if (!std::isfinite(t[0]) || t[1] > std::max(abs_tol, rel_tol * t[2])) {
        std::ostringstream msg;
        msg << "quadrature on [" << a << ", " << b << "] did not converge: estimate " << t[0]
            << ", error " << t[1] << ", tolerance " << std::max(abs_tol, rel_tol * t[2]);
        throw NumericError(msg.str());
    }
    return {t[0], t[1]};
}

/// Root of a monotone function on [lo, hi]; f(lo) and f(hi) must differ in sign.
template <class F>
double solve_bracketed(F&& f, double lo, double hi, int digits = 48) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0)) {
        std::ostringstream msg;
        msg << "root not bracketed on [" << lo << ", " << hi << "]: f = " << flo << ", " << fhi;
        throw NumericError(msg.str());
    }
    std::uintmax_t iters = 200;
    const auto [x0, x1] = boost::math::tools::toms748_solve(
        f, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(digits), iters);
    return 0.5 * (x0 + x1);
}

/// Expands hi geometrically from `start` until f(hi) >= target. f must be nondecreasing.
template <class F>
double expand_upper_bracket(F&& f, double target, double start, double limit = 1e300) {
    double hi = std::max(start, 1e-300);
    while (f(hi) < target) {
        hi *= 2.0;
        if (hi > limit) {
            std::ostringstream msg;
            msg << "could not bracket level " << target << " below " << limit;
            throw NumericError(msg.str());
        }
    }
    return hi;
}

struct Minimum {
    double x;
    double fx;
};

/// Golden-section search for a minimum of a unimodal f on [a, b], stopping when the
/// bracket is narrower than x_tol.
template <class F>
Minimum golden_section_minimize(F&& f, double a, double b, double x_tol, int max_iter = 200) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (int i = 0; i < max_iter && std::abs(b - a) > x_tol; ++i) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return fc < fd ? Minimum{c, fc} : Minimum{d, fd};
}

/// Natural log of n choose k.
inline double log_binomial(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace hdcap::numeric
