#pragma once

// M-ary on-off FSK with MAP energy detection. nu = 1 is ordinary FSK, M = 1
// with nu < 1 is on-off keying. Rates are in nats per symbol.

#include <hdcap/channel.hpp>
#include <hdcap/errors.hpp>
#include <hdcap/numeric.hpp>
#include <hdcap/specfun.hpp>

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

namespace hdcap {

struct OofskConfig {
    int m = 2;
    double nu = 1.0;

    void validate() const {
        if (m < 1) throw DomainError("OOFSK needs at least one tone");
        if (!(nu > 0.0 && nu <= 1.0)) throw DomainError("duty cycle must lie in (0, 1]");
    }
    [[nodiscard]] bool is_fsk() const { return nu == 1.0; }
};

struct DetectorParams {
    double alpha_sq;  ///< peak SNR of a transmitted tone, SNR/nu (times |h|^2 when known)
    double log_xi;    ///< log of the MAP threshold constant; -inf when nu = 1
    double tau;       ///< energy threshold; +inf means "always detect off"
};

/// (M+1) x (M+1) conditional law; index 0 is "no transmission". at(y, x) is
/// P(y | x), so every column sums to one.
class TransitionMatrix {
public:
    TransitionMatrix() = default;
    explicit TransitionMatrix(int size) : size_(size), p_(static_cast<std::size_t>(size) * size, 0.0) {}

    [[nodiscard]] int size() const { return size_; }
    [[nodiscard]] double at(int y, int x) const { return p_[index(y, x)]; }
    double& at(int y, int x) { return p_[index(y, x)]; }

private:
    [[nodiscard]] std::size_t index(int y, int x) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(size_) +
               static_cast<std::size_t>(x);
    }
    int size_ = 0;
    std::vector<double> p_;
};

/// The five distinct entries of a tone-symmetric OOFSK transition matrix.
struct ToneTransitions {
    double off_off;      ///< P_{0,0}
    double off_to_tone;  ///< P_{l,0}, l >= 1
    double miss;         ///< P_{0,l}
    double correct;      ///< P_{l,l}
    double cross;        ///< P_{l,m}, l != m; zero when M = 1

    [[nodiscard]] TransitionMatrix expand(int m) const {
        TransitionMatrix t(m + 1);
        t.at(0, 0) = off_off;
        for (int l = 1; l <= m; ++l) {
            t.at(l, 0) = off_to_tone;
            t.at(0, l) = miss;
            for (int k = 1; k <= m; ++k) t.at(k, l) = (k == l) ? correct : cross;
        }
        return t;
    }
};

namespace oofsk_detail {

inline void check_snr(double snr) {
    if (!(snr >= 0.0) || std::isinf(snr)) throw DomainError("SNR must be finite and >= 0");
}

/// ln(M (1 - nu) / nu); -inf for nu = 1.
inline double log_prior_ratio(const OofskConfig& cfg) {
    if (cfg.is_fsk()) return -std::numeric_limits<double>::infinity();
    return std::log(static_cast<double>(cfg.m)) + std::log1p(-cfg.nu) - std::log(cfg.nu);
}

/// A tone coordinate carrying the signal has energy |mu + n|^2 with
/// n ~ CN(0, sigma_sq); noise-only coordinates are Exp(1).
struct ToneLaw {
    double mu_sq;
    double sigma_sq;
};

/// Threshold solving ln Phi(x) = log_xi with
/// ln Phi(x) = (sigma^2 - 1)/sigma^2 x + ln I0(2 sqrt(x mu^2) / sigma^2).
inline double threshold(const ToneLaw& law, double log_xi) {
    if (!(log_xi >= 0.0)) return 0.0;
    const double slope = (law.sigma_sq - 1.0) / law.sigma_sq;
    const double bessel_scale = 2.0 * std::sqrt(law.mu_sq) / law.sigma_sq;
    if (slope == 0.0 && bessel_scale == 0.0) {
        return log_xi == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    if (slope == 0.0) {
        // AWGN form: tau = [I0^{-1}(xi)]^2 / (4 mu^2)
        const double root = bessel_i0_inv_log(log_xi) / bessel_scale;
        return root * root;
    }
    if (bessel_scale == 0.0) return log_xi / slope;
    const auto log_phi = [&](double x) {
        return slope * x + log_bessel_i0(bessel_scale * std::sqrt(x));
    };
    const double hi = numeric::expand_upper_bracket(log_phi, log_xi, 1.0);
    return numeric::solve_bracketed([&](double x) { return log_phi(x) - log_xi; }, 0.0, hi, 50);
}

/// Above this conditioning (sum |terms| / result) the alternating binomial sum
/// for P_{l,l} is replaced by direct quadrature.
inline constexpr double kAlternatingSumMaxGain = 64.0;

/// P_{l,l} = E[1{X > tau} (1 - e^{-X})^{M-1}] with X the signal-tone energy,
/// by the alternating binomial expansion. Returns nullopt when cancellation
/// would cost more than kAlternatingSumMaxGain in accuracy.
inline std::optional<double> correct_by_series(int m, const ToneLaw& law, double tau) {
    numeric::CompensatedSum sum;
    double magnitude = 0.0;
    for (int n = 0; n < m; ++n) {
        const double scale = n * law.sigma_sq + 1.0;
        const double a = std::sqrt(2.0 * law.mu_sq / (law.sigma_sq * scale));
        const double b = std::sqrt(2.0 * scale * tau / law.sigma_sq);
        const double log_mag =
            numeric::log_binomial(m - 1, n) - std::log(scale) - n * law.mu_sq / scale;
        const double term = std::exp(log_mag) * marcum_q1(a, b);
        magnitude += term;
        sum.add((n % 2 == 0) ? term : -term);
    }
    const double value = sum.value();
    if (m > 1 && magnitude > kAlternatingSumMaxGain * std::max(std::abs(value), 1e-300)) {
        return std::nullopt;
    }
    return std::max(0.0, value);
}

inline double tone_density(double x, const ToneLaw& law) {
    const double z = 2.0 * std::sqrt(law.mu_sq * x) / law.sigma_sq;
    return std::exp(-(x + law.mu_sq) / law.sigma_sq + log_bessel_i0(z)) / law.sigma_sq;
}

inline double correct_by_quadrature(int m, const ToneLaw& law, double tau) {
    const double sigma = std::sqrt(law.sigma_sq);
    const double mu = std::sqrt(law.mu_sq);
    const double upper = std::max((mu + 13.0 * sigma) * (mu + 13.0 * sigma), tau + 200.0 * law.sigma_sq);
    const auto f = [&](double x) {
        const double others = std::exp((m - 1) * std::log1p(-std::exp(-x)));
        return tone_density(x, law) * others;
    };
    double total = 0.0;
    const double mode = law.mu_sq;
    if (tau < mode) {
        total += numeric::integrate(f, tau, mode, 1e-16, 1e-13).value;
        total += numeric::integrate(f, mode, upper, 1e-16, 1e-13).value;
    } else {
        total += numeric::integrate(f, tau, upper, 1e-16, 1e-13).value;
    }
    return std::min(1.0, std::max(0.0, total));
}

inline ToneTransitions tone_transitions(int m, const ToneLaw& law, double tau) {
    ToneTransitions out{};
    if (std::isinf(tau)) {
        out.off_off = 1.0;
        out.miss = 1.0;
        return out;
    }
    const double log_below = std::log1p(-std::exp(-tau));  // ln(1 - e^{-tau})
    out.off_off = tau == 0.0 ? 0.0 : std::exp(m * log_below);
    out.off_to_tone = tau == 0.0 ? 1.0 / m : -std::expm1(m * log_below) / m;
    const double others_below = (m == 1) ? 1.0 : (tau == 0.0 ? 0.0 : std::exp((m - 1) * log_below));
    const double a0 = std::sqrt(2.0 * law.mu_sq / law.sigma_sq);
    const double b0 = std::sqrt(2.0 * tau / law.sigma_sq);
    out.miss = others_below * marcum_q1_complement(a0, b0);
    if (m == 1) {
        out.correct = marcum_q1(a0, b0);
        out.cross = 0.0;
        return out;
    }
    const auto series = correct_by_series(m, law, tau);
    out.correct = series ? *series : correct_by_quadrature(m, law, tau);
    out.cross = std::max(0.0, (1.0 - out.correct - out.miss) / (m - 1));
    return out;
}

}  // namespace oofsk_detail

/// MAP detector constants. For AWGN the tone gain is d; with coherent fading
/// the realized |h|^2 must be supplied and the AWGN form is used with it.
inline DetectorParams detector_params(const OofskConfig& cfg, double snr, const ChannelSpec& spec,
                                      std::optional<double> h_sq = std::nullopt) {
    cfg.validate();
    spec.validate();
    oofsk_detail::check_snr(snr);
    const double alpha_sq = snr / cfg.nu;
    oofsk_detail::ToneLaw law{};
    double reported_alpha_sq = alpha_sq;
    switch (spec.kind) {
        case ChannelKind::Awgn:
            law = {alpha_sq * spec.d * spec.d, 1.0};
            break;
        case ChannelKind::CoherentFading:
            if (!h_sq) throw UsageError("coherent OOFSK detector needs the realized |h|^2");
            reported_alpha_sq = alpha_sq * *h_sq;
            law = {reported_alpha_sq, 1.0};
            break;
        case ChannelKind::NoncoherentRician:
            law = {alpha_sq * spec.d * spec.d, 1.0 + alpha_sq * spec.gamma_sq};
            break;
    }
    // xi = M(1-nu)/nu * sigma^2 * exp(mu^2 / sigma^2), in logs
    const double log_xi =
        oofsk_detail::log_prior_ratio(cfg) + std::log(law.sigma_sq) + law.mu_sq / law.sigma_sq;
    return {reported_alpha_sq, log_xi, oofsk_detail::threshold(law, log_xi)};
}

namespace oofsk_detail {

inline ToneTransitions awgn_entries(const OofskConfig& cfg, double snr, double gain_sq) {
    const double alpha_sq = snr / cfg.nu;
    const ToneLaw law{alpha_sq * gain_sq, 1.0};
    const double log_xi = log_prior_ratio(cfg) + law.mu_sq;
    return tone_transitions(cfg.m, law, threshold(law, log_xi));
}

inline ToneTransitions noncoherent_entries(const OofskConfig& cfg, double snr,
                                           const ChannelSpec& spec) {
    const DetectorParams det = detector_params(cfg, snr, spec);
    const ToneLaw law{det.alpha_sq * spec.d * spec.d, 1.0 + det.alpha_sq * spec.gamma_sq};
    return tone_transitions(cfg.m, law, det.tau);
}

}  // namespace oofsk_detail

/// Transition probabilities over AWGN with unit gain.
inline TransitionMatrix transitions_awgn(const OofskConfig& cfg, double snr) {
    cfg.validate();
    oofsk_detail::check_snr(snr);
    return oofsk_detail::awgn_entries(cfg, snr, 1.0).expand(cfg.m);
}

/// Transition probabilities over a noncoherent Rician channel (d = 0 is
/// Rayleigh). gamma^2 = 0 recovers AWGN with gain d.
inline TransitionMatrix transitions_noncoherent(const OofskConfig& cfg, double snr,
                                                const ChannelSpec& spec) {
    cfg.validate();
    spec.validate();
    oofsk_detail::check_snr(snr);
    return oofsk_detail::noncoherent_entries(cfg, snr, spec).expand(cfg.m);
}

namespace oofsk_detail {

/// H(y) - H(y|x) with input prior {1 - nu, nu/M, ..., nu/M}, written as
/// sum_x prior(x) sum_y P(y|x) ln(P(y|x)/P(y)) over the distinct entries so
/// that low-SNR rates do not drown in entropy cancellation.
inline double rate_from_entries(const OofskConfig& cfg, const ToneTransitions& e) {
    const double nu = cfg.nu;
    const double m = cfg.m;
    const double q0 = (1.0 - nu) * e.off_off + nu * e.miss;
    const double q1 = (1.0 - nu) * e.off_to_tone + nu / m * e.correct + (m - 1.0) * nu / m * e.cross;
    const auto kl = [](double p, double q) { return p > 0.0 ? p * std::log(p / q) : 0.0; };
    numeric::CompensatedSum acc;
    acc.add((1.0 - nu) * kl(e.off_off, q0));
    acc.add((1.0 - nu) * m * kl(e.off_to_tone, q1));
    acc.add(nu * kl(e.miss, q0));
    acc.add(nu * kl(e.correct, q1));
    acc.add(nu * (m - 1.0) * kl(e.cross, q1));
    return std::max(0.0, acc.value());
}

}  // namespace oofsk_detail

/// Achievable rate in nats per symbol from a tone-symmetric transition matrix.
/// Only entries (0,0), (1,0), (0,1), (1,1) and (2,1) are read.
inline double oofsk_rate(const OofskConfig& cfg, const TransitionMatrix& t) {
    cfg.validate();
    if (t.size() != cfg.m + 1) throw UsageError("transition matrix does not match M");
    const ToneTransitions e{t.at(0, 0), t.at(1, 0), t.at(0, 1), t.at(1, 1),
                            cfg.m > 1 ? t.at(2, 1) : 0.0};
    return oofsk_detail::rate_from_entries(cfg, e);
}


/// Average rate with a coherent receiver: E_{|h|^2}{I_M(SNR, nu, |h|^2)}, the
/// threshold recomputed for each gain realization.
inline double oofsk_rate_coherent(const OofskConfig& cfg, double snr, const ChannelSpec& spec) {
    cfg.validate();
    spec.validate();
    oofsk_detail::check_snr(snr);
    if (spec.kind != ChannelKind::CoherentFading) {
        throw UsageError("oofsk_rate_coherent needs a coherent fading channel");
    }
    if (snr == 0.0) return 0.0;
    return expect_over_fading(spec, [&](double u) {
        return oofsk_detail::rate_from_entries(cfg, oofsk_detail::awgn_entries(cfg, snr, u));
    });
}

inline double oofsk_rate(const OofskConfig& cfg, double snr, const ChannelSpec& spec) {
    cfg.validate();
    spec.validate();
    oofsk_detail::check_snr(snr);
    switch (spec.kind) {
        case ChannelKind::Awgn:
            return oofsk_detail::rate_from_entries(
                cfg, oofsk_detail::awgn_entries(cfg, snr, spec.d * spec.d));
        case ChannelKind::CoherentFading:
            return oofsk_rate_coherent(cfg, snr, spec);
        case ChannelKind::NoncoherentRician:
            return oofsk_detail::rate_from_entries(cfg, oofsk_detail::noncoherent_entries(cfg, snr, spec));
    }
    return 0.0;
}

/// Transition matrix averaged over the gain law for a coherent receiver;
/// AWGN and noncoherent channels return their exact matrices.
inline TransitionMatrix oofsk_transitions_average(const OofskConfig& cfg, double snr,
                                                  const ChannelSpec& spec) {
    cfg.validate();
    spec.validate();
    switch (spec.kind) {
        case ChannelKind::Awgn:
            return oofsk_detail::awgn_entries(cfg, snr, spec.d * spec.d).expand(cfg.m);
        case ChannelKind::NoncoherentRician:
            return transitions_noncoherent(cfg, snr, spec);
        case ChannelKind::CoherentFading:
            break;
    }
    const auto avg = [&](auto member) {
        return expect_over_fading(spec, [&](double u) {
            return oofsk_detail::awgn_entries(cfg, snr, u).*member;
        });
    };
    ToneTransitions e{};
    e.off_off = avg(&ToneTransitions::off_off);
    e.off_to_tone = avg(&ToneTransitions::off_to_tone);
    e.miss = avg(&ToneTransitions::miss);
    e.correct = avg(&ToneTransitions::correct);
    e.cross = avg(&ToneTransitions::cross);
    return e.expand(cfg.m);
}

/// Duty cycle nu = SNR / ((1 + eps) ln(1/SNR)), clamped to (0, 1].
inline double duty_cycle_schedule(double snr, double epsilon) {
    if (!(snr > 0.0 && snr < 1.0)) throw DomainError("duty_cycle_schedule: SNR must lie in (0, 1)");
    if (!(epsilon > 0.0)) throw DomainError("duty_cycle_schedule: epsilon must be positive");
    return std::min(1.0, snr / ((1.0 + epsilon) * -std::log(snr)));
}

}  // namespace hdcap
