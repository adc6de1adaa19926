#pragma once

// Hard-decision M-PSK: received-phase density, the discrete channel it induces,
// capacity, and the closed-form zero-SNR derivatives.

#include <hdcap/channel.hpp>
#include <hdcap/errors.hpp>
#include <hdcap/numeric.hpp>
#include <hdcap/specfun.hpp>

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace hdcap {

struct PskConfig {
    int m = 2;

    void validate() const {
        if (m < 2) throw DomainError("PSK constellation size must be at least 2");
    }
};

/// Real number that may be +infinity, with the infinite case carried as a tag
/// rather than as a large float.
class ExtendedReal {
public:
    static ExtendedReal finite(double v) { return ExtendedReal(v, false); }
    static ExtendedReal positive_infinity() { return ExtendedReal(0.0, true); }

    [[nodiscard]] bool is_infinite() const { return infinite_; }
    [[nodiscard]] double value() const {
        return infinite_ ? std::numeric_limits<double>::infinity() : value_;
    }

private:
    ExtendedReal(double v, bool inf) : value_(v), infinite_(inf) {}
    double value_;
    bool infinite_;
};

struct LowSnrSummary {
    double c_dot0;          ///< dC/dSNR at 0, nats/symbol
    ExtendedReal c_ddot0;   ///< d^2C/dSNR^2 at 0
    double eb_n0_zero_se_db;
    double s0;              ///< wideband slope, bits/s/Hz per 3 dB
};

/// Conditional law of the detector output given the phase-0 symbol was sent.
/// p[l] is P(y = l+1 | x = 1); the full matrix is the circulant extension.
struct TransitionRow {
    std::vector<double> p;

    /// P(y = l | x = m), 1-based as in the matrix P_{l,m}.
    [[nodiscard]] double at(int l, int m) const {
        const int size = static_cast<int>(p.size());
        const int shift = ((l - m) % size + size) % size;
        return p[static_cast<std::size_t>(shift)];
    }
};

namespace psk_detail {

/// Effective SNR seen by the phase: d^2 SNR / (gamma^2 SNR + 1), or |h|^2 SNR
/// for a known gain.
inline double phase_snr(const ChannelSpec& spec, double snr, std::optional<double> h_sq) {
    if (spec.kind == ChannelKind::CoherentFading) {
        if (!h_sq) throw UsageError("coherent PSK needs the realized |h|^2");
        return *h_sq * snr;
    }
    return spec.d * spec.d * snr / (spec.gamma_sq * snr + 1.0);
}

/// Non-uniform part of the phase density for effective SNR rho.
inline double phase_pdf_excess(double theta, double rho) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    // 1 - Q(sqrt(2 rho) cos theta) evaluated as Q(-...).
    return std::sqrt(rho / numeric::kPi) * c * std::exp(-rho * s * s) *
           gaussian_q(-std::sqrt(2.0 * rho) * c);
}

inline double phase_pdf_rho(double theta, double rho) {
    return std::exp(-rho) / (2.0 * numeric::kPi) + phase_pdf_excess(theta, rho);
}

inline constexpr double kSectorAbsTol = 1e-14;
inline constexpr double kSectorRelTol = 1e-13;

inline TransitionRow row_from_rho(int m, double rho) {
    TransitionRow row;
    row.p.resize(static_cast<std::size_t>(m));
    if (rho == 0.0) {
        for (auto& v : row.p) v = 1.0 / m;
        return row;
    }
    const double base = std::exp(-rho) / m;
    const auto g = [rho](double t) { return phase_pdf_excess(t, rho); };
    const double half = numeric::kPi / m;
    for (int l = 1; l <= m; ++l) {
        const double lo = (2 * l - 3) * half;
        const double hi = (2 * l - 1) * half;
        double mass;
        if (l == 1) {
            // the only sector containing the density's peak, whose width is
            // about 1/sqrt(rho); split at geometric multiples of that width
            numeric::CompensatedSum acc;
            double inner = 0.0;
            for (double w = 1.0 / std::sqrt(2.0 * rho); inner < hi; w *= 4.0) {
                const double outer = std::min(hi, w);
                acc.add(numeric::integrate(g, -outer, -inner, kSectorAbsTol, kSectorRelTol).value);
                acc.add(numeric::integrate(g, inner, outer, kSectorAbsTol, kSectorRelTol).value);
                inner = outer;
            }
            mass = acc.value();
        } else {
            mass = numeric::integrate(g, lo, hi, kSectorAbsTol, kSectorRelTol).value;
        }
        row.p[static_cast<std::size_t>(l - 1)] = std::max(0.0, base + mass);
    }
    return row;
}

/// sum_l p_l ln(M p_l) with the 0 ln 0 = 0 convention and a 1e-300 floor.
inline double symmetric_capacity(const std::vector<double>& p) {
    const double m = static_cast<double>(p.size());
    numeric::CompensatedSum acc;
    for (double v : p) {
        if (v > 0.0) acc.add(v * std::log(m * std::max(v, 1e-300)));
    }
    return std::max(0.0, acc.value());
}

inline void check_snr(double snr) {
    if (!(snr >= 0.0) || std::isinf(snr)) throw DomainError("SNR must be finite and >= 0");
}

}  // namespace psk_detail

/// Density of the received phase given phase 0 was sent. Noncoherent and AWGN
/// use the channel statistics; coherent fading needs the realized |h|^2.
inline double phase_pdf(double theta, double snr, const ChannelSpec& spec,
                        std::optional<double> h_sq = std::nullopt) {
    psk_detail::check_snr(snr);
    return psk_detail::phase_pdf_rho(theta, psk_detail::phase_snr(spec, snr, h_sq));
}

/// First row of the PSK transition matrix; sector l covers
/// [(2l-3)pi/M, (2l-1)pi/M).
inline TransitionRow psk_transition_row(const PskConfig& cfg, const ChannelSpec& spec, double snr,
                                        std::optional<double> h_sq = std::nullopt) {
    cfg.validate();
    spec.validate();
    psk_detail::check_snr(snr);
    return psk_detail::row_from_rho(cfg.m, psk_detail::phase_snr(spec, snr, h_sq));
}

/// Row averaged over the fading law (coherent receivers): E_h{P_{l,1,h}}.
inline TransitionRow psk_transition_row_average(const PskConfig& cfg, const ChannelSpec& spec,
                                                double snr) {
    if (spec.kind != ChannelKind::CoherentFading) return psk_transition_row(cfg, spec, snr);
    TransitionRow avg;
    avg.p.assign(static_cast<std::size_t>(cfg.m), 0.0);
    for (int l = 0; l < cfg.m; ++l) {
        avg.p[static_cast<std::size_t>(l)] = expect_over_fading(spec, [&](double u) {
            return psk_detail::row_from_rho(cfg.m, u * snr).p[static_cast<std::size_t>(l)];
        });
    }
    return avg;
}

/// Capacity in nats/symbol (equiprobable inputs are optimal for this
/// symmetric channel). Coherent fading averages the conditional capacity.
inline double psk_capacity(const PskConfig& cfg, const ChannelSpec& spec, double snr) {
    cfg.validate();
    spec.validate();
    psk_detail::check_snr(snr);
    if (snr == 0.0) return 0.0;
    if (spec.kind == ChannelKind::CoherentFading) {
        return expect_over_fading(spec, [&](double u) {
            return psk_detail::symmetric_capacity(psk_detail::row_from_rho(cfg.m, u * snr).p);
        });
    }
    return psk_detail::symmetric_capacity(
        psk_detail::row_from_rho(cfg.m, psk_detail::phase_snr(spec, snr, std::nullopt)).p);
}

/// ln 2 - h(1/2 - delta), written so that small delta keeps full relative accuracy.
inline double binary_symmetric_capacity(double delta) {
    const double low = 0.5 - delta;
    const double low_term = low > 0.0 ? low * std::log1p(-2.0 * delta) : 0.0;
    return low_term + (0.5 + delta) * std::log1p(2.0 * delta);
}

/// Closed forms available for M = 2 and M = 4. In terms of the effective SNR
/// rho = d^2 SNR / (gamma^2 SNR + 1): C2 = ln2 - h(Q(sqrt(2 rho))) and
/// C4 = 2 [ln2 - h(Q(sqrt(rho)))], which under AWGN is C4(SNR) = 2 C2(SNR/2).
inline double psk_capacity_closed_form(const PskConfig& cfg, const ChannelSpec& spec, double snr) {
    cfg.validate();
    spec.validate();
    psk_detail::check_snr(snr);
    if (cfg.m != 2 && cfg.m != 4) throw UsageError("closed-form PSK capacity exists for M = 2, 4 only");
    const auto conditional = [m = cfg.m](double rho) {
        // 1/2 - Q(y) = erf(y / sqrt 2) / 2
        if (m == 2) return binary_symmetric_capacity(0.5 * std::erf(std::sqrt(rho)));
        return 2.0 * binary_symmetric_capacity(0.5 * std::erf(std::sqrt(0.5 * rho)));
    };
    if (snr == 0.0) return 0.0;
    if (spec.kind == ChannelKind::CoherentFading) {
        return expect_over_fading(spec, [&](double u) { return conditional(u * snr); });
    }
    return conditional(psk_detail::phase_snr(spec, snr, std::nullopt));
}

namespace psk_detail {

/// psi(M) of the M >= 5 second-derivative branch.
inline double psi(int m) {
    const double mm = m;
    const double s1 = std::sin(numeric::kPi / mm);
    const double s2 = std::sin(2.0 * numeric::kPi / mm);
    return mm * mm / (16.0 * numeric::kPi * numeric::kPi) *
           ((2.0 - numeric::kPi) * s2 * s2 + (mm * mm - 4.0 * numeric::kPi) * s1 * s1 * s1 * s1 -
            2.0 * mm * s1 * s1 * s2);
}

/// First derivative per unit |d|^2.
inline double first_derivative_unit(int m) {
    if (m == 2) return 2.0 / numeric::kPi;
    const double s = std::sin(numeric::kPi / m);
    return m * m * s * s / (4.0 * numeric::kPi);
}

/// Second derivative split as a * d^4 + b * d^2 gamma^2; infinite for M = 3.
struct SecondDerivativeParts {
    double quartic;
    double cross;
};

inline SecondDerivativeParts second_derivative_parts(int m) {
    const double pi = numeric::kPi;
    if (m == 2) return {8.0 / (3.0 * pi) * (1.0 / pi - 1.0), -4.0 / pi};
    if (m == 4) return {4.0 / (3.0 * pi) * (1.0 / pi - 1.0), -4.0 / pi};
    const double s = std::sin(pi / m);
    return {psi(m), -static_cast<double>(m) * m * s * s / (2.0 * pi)};
}

inline LowSnrSummary summarize(double c_dot, ExtendedReal c_ddot, double scale) {
    LowSnrSummary out{c_dot, c_ddot, std::numeric_limits<double>::infinity(), 0.0};
    if (c_dot > 0.0) out.eb_n0_zero_se_db = 10.0 * std::log10(scale * numeric::kLn2 / c_dot);
    if (!c_ddot.is_infinite() && c_ddot.value() < 0.0 && c_dot > 0.0) {
        out.s0 = 2.0 * c_dot * c_dot / -c_ddot.value();
    }
    return out;
}

}  // namespace psk_detail

/// Zero-SNR derivatives, bit energy at zero spectral efficiency and wideband
/// slope. The bit energy is normalized by the received energy scale E|h|^2.
inline LowSnrSummary psk_lowsnr(const PskConfig& cfg, const ChannelSpec& spec) {
    cfg.validate();
    spec.validate();
    const FadingMoments mom = rician_moments(spec);
    const double d2 = spec.d * spec.d;
    const double first = psk_detail::first_derivative_unit(cfg.m);
    double c_dot;
    double quartic_weight;  // multiplies the d^4 part
    double cross_weight;    // multiplies the d^2 gamma^2 part
    if (spec.kind == ChannelKind::CoherentFading) {
        c_dot = first * mom.m2;
        quartic_weight = mom.m4;
        cross_weight = 0.0;
    } else {
        c_dot = first * d2;
        quartic_weight = d2 * d2;
        cross_weight = d2 * spec.gamma_sq;
    }
    ExtendedReal c_ddot = ExtendedReal::positive_infinity();
    if (cfg.m != 3) {
        const auto parts = psk_detail::second_derivative_parts(cfg.m);
        c_ddot = ExtendedReal::finite(parts.quartic * quartic_weight + parts.cross * cross_weight);
    }
    return psk_detail::summarize(c_dot, c_ddot, mom.m2);
}

/// Limit of psk_lowsnr as M -> infinity (continuous phase input).
inline LowSnrSummary psk_lowsnr_asymptotic(const ChannelSpec& spec) {
    spec.validate();
    const double pi = numeric::kPi;
    const FadingMoments mom = rician_moments(spec);
    const double d2 = spec.d * spec.d;
    const double quartic = (pi * pi - 8.0 * pi + 8.0) / 16.0;
    if (spec.kind == ChannelKind::CoherentFading) {
        return psk_detail::summarize(pi * mom.m2 / 4.0, ExtendedReal::finite(quartic * mom.m4),
                                     mom.m2);
    }
    return psk_detail::summarize(
        pi * d2 / 4.0, ExtendedReal::finite(quartic * d2 * d2 - d2 * spec.gamma_sq * pi / 2.0),
        mom.m2);
}

/// Coefficients of C = phi1 SNR + phi2 SNR^{3/2} + phi3 SNR^2 + o(SNR^2),
/// evaluated from the finite trigonometric sums over the constellation.
struct TaylorCoefficients {
    double phi1;
    double phi2;
    double phi3;
};

inline TaylorCoefficients psk_taylor_coeffs(const PskConfig& cfg, double d, double gamma_sq) {
    cfg.validate();
    const double pi = numeric::kPi;
    const double m = cfg.m;
    const double s1 = std::sin(pi / m);
    const double s2 = std::sin(2.0 * pi / m);
    double c2 = 0.0;
    double c3 = 0.0;
    double c4 = 0.0;
    double c2x = 0.0;  // sum cos^2(4 pi i / M)
    for (int i = 1; i <= cfg.m; ++i) {
        const double c = std::cos(2.0 * pi * i / m);
        const double cx = std::cos(4.0 * pi * i / m);
        c2 += c * c;
        c3 += c * c * c;
        c4 += c * c * c * c;
        c2x += cx * cx;
    }
    const double d2 = d * d;
    const double d3 = d2 * d;
    const double d4 = d2 * d2;
    TaylorCoefficients out{};
    out.phi1 = m * d2 / (2.0 * pi) * s1 * s1 * c2;
    out.phi2 = m * d3 / (pi * std::sqrt(pi)) * (s1 * s2 - m / 6.0 * s1 * s1 * s1) * c3;
    out.phi3 = -m * m * d4 / (16.0 * pi) * s2 * s2 +
               m * d4 * (pi + 2.0) / (16.0 * pi * pi) * s2 * s2 * c2x +
               d4 * ((m * m * m / (12.0 * pi * pi) - m / (3.0 * pi)) * s1 * s1 * s1 * s1 -
                     m * m / (2.0 * pi * pi) * s1 * s1 * s2) * c4 +
               d4 * m * m / (4.0 * pi * pi) * s1 * s1 * s2 * c2 -
               d2 * gamma_sq / (2.0 * pi) * m * s1 * s1 * c2;
    return out;
}

/// Bit energy at zero spectral efficiency and wideband slope of soft-detected
/// QPSK under a peak constraint, for comparison overlays.
struct SoftQpskReference {
    double eb_zero_se_db;
    double s0;
};

inline SoftQpskReference soft_qpsk_reference(double k_factor) {
    if (!(k_factor > 0.0)) throw DomainError("soft_qpsk_reference: K must be positive");
    if (std::isinf(k_factor)) return {10.0 * std::log10(numeric::kLn2), 2.0};
    const double ratio = k_factor / (1.0 + k_factor);
    return {10.0 * std::log10((1.0 + 1.0 / k_factor) * numeric::kLn2), 2.0 * ratio * ratio};
}

}  // namespace hdcap
