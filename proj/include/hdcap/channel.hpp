#pragma once

#include <hdcap/errors.hpp>
#include <hdcap/numeric.hpp>
#include <hdcap/random.hpp>
#include <hdcap/specfun.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <deque>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace hdcap {

enum class ChannelKind { Awgn, CoherentFading, NoncoherentRician };

inline std::string to_string(ChannelKind kind) {
    switch (kind) {
        case ChannelKind::Awgn: return "awgn";
        case ChannelKind::CoherentFading: return "coherent";
        case ChannelKind::NoncoherentRician: return "rician";
    }
    return "unknown";
}

/// Channel gain h = d + diffuse part of variance gamma_sq. The line-of-sight
/// component is taken real and nonnegative.
struct ChannelSpec {
    ChannelKind kind = ChannelKind::Awgn;
    double d = 1.0;
    double gamma_sq = 0.0;

    static ChannelSpec awgn(double d = 1.0) { return make(ChannelKind::Awgn, d, 0.0); }
    static ChannelSpec coherent(double d, double gamma_sq) {
        return make(ChannelKind::CoherentFading, d, gamma_sq);
    }
    static ChannelSpec noncoherent(double d, double gamma_sq) {
        return make(ChannelKind::NoncoherentRician, d, gamma_sq);
    }

    /// Rician factor K = d^2/gamma^2 and total power omega = d^2 + gamma^2.
    /// K = +inf gives an unfaded gain sqrt(omega).
    static ChannelSpec from_k_factor(ChannelKind kind, double k_factor, double omega = 1.0) {
        if (!(k_factor >= 0.0) || !(omega > 0.0)) {
            throw DomainError("Rician factor must be >= 0 and total power > 0");
        }
        if (std::isinf(k_factor)) return make(kind, std::sqrt(omega), 0.0);
        return make(kind, std::sqrt(k_factor * omega / (1.0 + k_factor)), omega / (1.0 + k_factor));
    }

    [[nodiscard]] double rician_factor() const {
        return gamma_sq == 0.0 ? std::numeric_limits<double>::infinity() : d * d / gamma_sq;
    }

    void validate() const {
        if (!(d >= 0.0) || !std::isfinite(d) || !(gamma_sq >= 0.0) || !std::isfinite(gamma_sq)) {
            throw DomainError("channel: d and gamma_sq must be finite and nonnegative");
        }
        if (kind == ChannelKind::Awgn && (gamma_sq != 0.0 || d <= 0.0)) {
            throw DomainError("channel: AWGN requires gamma_sq = 0 and d > 0");
        }
        if (d == 0.0 && gamma_sq == 0.0) {
            throw DomainError("channel: zero gain");
        }
    }

private:
    static ChannelSpec make(ChannelKind kind, double d, double gamma_sq) {
        ChannelSpec spec{kind, d, gamma_sq};
        spec.validate();
        return spec;
    }
};

/// E|h|^2 and E|h|^4.
struct FadingMoments {
    double m2;
    double m4;
};

/// Moments of a proper complex Gaussian gain with mean d and variance gamma^2.
/// For AWGN gamma^2 is zero and the moments reduce to d^2 and d^4.
inline FadingMoments rician_moments(const ChannelSpec& spec) {
    const double d2 = spec.d * spec.d;
    const double g2 = spec.gamma_sq;
    return {d2 + g2, d2 * d2 + 4.0 * d2 * g2 + 2.0 * g2 * g2};
}

inline std::complex<double> sample_fading(const ChannelSpec& spec, RandomStream& stream) {
    if (spec.kind == ChannelKind::Awgn) return {spec.d, 0.0};
    return std::complex<double>(spec.d, 0.0) + stream.complex_normal(spec.gamma_sq);
}

namespace channel_detail {

/// Quantile of |h|^2 given the probability t and its complement tc = 1 - t
/// (both supplied so that either tail is resolved to full relative accuracy).
inline double gain_quantile(double d, double gamma_sq, double t, double tc) {
    if (d == 0.0) {
        return gamma_sq * (t < 0.5 ? -std::log1p(-t) : -std::log(tc));
    }
    // 2|h|^2 / gamma^2 is noncentral chi-square with 2 degrees of freedom and
    // noncentrality 2 d^2 / gamma^2, so P(|h|^2 > u) = Q1(sqrt(2) d / gamma, sqrt(2u) / gamma).
    const double gamma = std::sqrt(gamma_sq);
    const double a = std::sqrt(2.0) * d / gamma;
    const bool lower = t < 0.5;
    const double target = std::log(lower ? t : tc);
    const auto g = [&](double b) {
        const MarcumPair p = marcum_q1_pair(a, b);
        // increasing in b
        // underflowed tails are clamped so the bracket solver never sees inf
        const double v = lower ? std::log(p.complement) - target : target - std::log(p.q);
        return std::clamp(v, -1e4, 1e4);
    };
    double hi = a + 8.0;
    while (g(hi) < 0.0) hi += 8.0;
    double lo = std::max(0.0, a - 8.0);
    for (double step = 8.0; lo > 1.0 && g(lo) > 0.0; step *= 2.0) lo = std::max(1.0, lo - step);
    if (lo == 0.0) lo = std::min(1.0, hi / 2.0);
    while (g(lo) > 0.0) lo *= 1e-2;
    const double b = numeric::solve_bracketed(g, lo, hi, 50);
    return 0.5 * gamma_sq * b * b;
}

struct Node {
    double u;
    double w;
};

/// Tanh-sinh nodes in t = P(|h|^2 <= u) for one (d, gamma^2). Level 0 has 129
/// nodes; each further level halves the step and adds only the new odd nodes.
class FadingNodes {
public:
    static constexpr double kHalfWidth = 3.2;
    static constexpr int kBaseHalfCount = 64;

    FadingNodes(double d, double gamma_sq) : d_(d), gamma_sq_(gamma_sq) {}

    double step(int level) const { return kHalfWidth / kBaseHalfCount / std::ldexp(1.0, level); }

    const std::vector<Node>& level(int j) {
        std::lock_guard<std::mutex> lock(mutex_);
        while (static_cast<int>(levels_.size()) <= j) build(static_cast<int>(levels_.size()));
        return levels_[static_cast<std::size_t>(j)];
    }

private:
    void build(int j) {
        const double h = step(j);
        const int half = kBaseHalfCount << j;
        std::vector<Node> nodes;
        for (int k = -half; k <= half; ++k) {
            if (j > 0 && k % 2 == 0) continue;
            const double x = k * h;
            const double s = numeric::kPi * std::sinh(x);
            const double t = 1.0 / (1.0 + std::exp(-s));
            const double tc = 1.0 / (1.0 + std::exp(s));
            const double w = numeric::kPi * std::cosh(x) * t * tc;
            if (w == 0.0 || t == 0.0 || tc == 0.0) continue;
            nodes.push_back({gain_quantile(d_, gamma_sq_, t, tc), w});
        }
        levels_.push_back(std::move(nodes));
    }

    double d_;
    double gamma_sq_;
    std::mutex mutex_;
    std::deque<std::vector<Node>> levels_;
};

inline std::shared_ptr<FadingNodes> nodes_for(double d, double gamma_sq) {
    static std::mutex mutex;
    static std::map<std::pair<double, double>, std::shared_ptr<FadingNodes>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto& slot = cache[{d, gamma_sq}];
    if (!slot) slot = std::make_shared<FadingNodes>(d, gamma_sq);
    return slot;
}

}  // namespace channel_detail

/// Relative agreement required between successive node doublings.
inline constexpr double kFadingRelTol = 1e-6;
inline constexpr int kFadingMaxLevels = 8;

/// E{f(|h|^2)} for h ~ CN(d, gamma^2), by fixed nodes in the probability
/// variable t = F(|h|^2). The node count doubles until two successive estimates
/// agree to kFadingRelTol. AWGN (and gamma^2 = 0) reduce to f(d^2).
template <class F>
double expect_over_fading(const ChannelSpec& spec, F&& f) {
    spec.validate();
    if (spec.kind == ChannelKind::Awgn || spec.gamma_sq == 0.0) return f(spec.d * spec.d);
    auto nodes = channel_detail::nodes_for(spec.d, spec.gamma_sq);
    const auto sum_level = [&](int j) {
        numeric::CompensatedSum acc;
        for (const auto& node : nodes->level(j)) acc.add(node.w * f(node.u));
        return acc.value();
    };
    double estimate = nodes->step(0) * sum_level(0);
    for (int j = 1; j < kFadingMaxLevels; ++j) {
        const double next = 0.5 * estimate + nodes->step(j) * sum_level(j);
        if (std::abs(next - estimate) <= kFadingRelTol * std::abs(next)) return next;
        estimate = next;
    }
    std::ostringstream msg;
    msg << "fading expectation did not converge (d=" << spec.d << ", gamma_sq=" << spec.gamma_sq
        << ", last estimate " << estimate << ")";
    throw NumericError(msg.str());
}

}  // namespace hdcap
