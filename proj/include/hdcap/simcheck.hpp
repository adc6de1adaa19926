#pragma once

// Monte Carlo transmission over the modeled channels with the same
// hard-decision detectors, used to check the analytic transition laws.

#include <hdcap/channel.hpp>
#include <hdcap/errors.hpp>
#include <hdcap/metrics.hpp>
#include <hdcap/numeric.hpp>
#include <hdcap/oofsk.hpp>
#include <hdcap/psk.hpp>
#include <hdcap/random.hpp>
#include <hdcap/specfun.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <mutex>
#include <string>
#include <vector>

namespace hdcap {

/// Tallies and their comparison with the analytic law. Rows of `counts`,
/// `empirical` and `analytic` are indexed by the input symbol, columns by
/// the detector output. PSK only sends the phase-0 symbol, so it has one row.
struct SimReport {
    std::string scheme;
    nlohmann::json params;
    std::uint64_t seed = 0;
    std::uint64_t trials = 0;
    std::vector<std::vector<std::uint64_t>> counts;
    std::vector<std::vector<double>> empirical;
    std::vector<std::vector<double>> analytic;
    double max_abs_dev = 0.0;  ///< deviation at the worst entry (largest z-score)
    double sigma_bound = 0.0;  ///< 3 sigma binomial bound at that entry
    double max_z = 0.0;        ///< largest |empirical - analytic| / sigma
    double empirical_mi = 0.0;
    double analytic_rate = 0.0;

    [[nodiscard]] bool passed() const { return max_abs_dev <= sigma_bound; }
};

/// Trials per substream. Trials are partitioned into fixed blocks, each with
/// its own substream, so counts do not depend on the thread count.
inline constexpr std::uint64_t kSimBlockTrials = 1ULL << 16;

/// Mutual information of prior x t in nats; t.at(y, x) = P(y | x).
inline double empirical_mi(const TransitionMatrix& t, const std::vector<double>& prior) {
    const int n = t.size();
    if (static_cast<int>(prior.size()) != n) throw UsageError("prior does not match matrix size");
    std::vector<double> q(static_cast<std::size_t>(n), 0.0);
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) q[static_cast<std::size_t>(y)] += prior[static_cast<std::size_t>(x)] * t.at(y, x);
    }
    numeric::CompensatedSum acc;
    for (int x = 0; x < n; ++x) {
        const double px = prior[static_cast<std::size_t>(x)];
        if (px == 0.0) continue;
        for (int y = 0; y < n; ++y) {
            const double p = t.at(y, x);
            if (p > 0.0) acc.add(px * p * std::log(p / q[static_cast<std::size_t>(y)]));
        }
    }
    return std::max(0.0, acc.value());
}

/// Full circulant PSK matrix from its first row.
inline TransitionMatrix circulant_matrix(const std::vector<double>& row) {
    const int m = static_cast<int>(row.size());
    TransitionMatrix t(m);
    for (int x = 0; x < m; ++x) {
        for (int y = 0; y < m; ++y) t.at(y, x) = row[static_cast<std::size_t>(((y - x) % m + m) % m)];
    }
    return t;
}

namespace simcheck_detail {

inline void check_trials(std::uint64_t trials) {
    if (trials < 1) throw UsageError("simulation needs at least one trial");
}

/// Runs `block(stream, count, tally)` for every block of trials on
/// independent substreams and sums the tallies.
template <class Block>
std::vector<std::vector<std::uint64_t>> run_blocks(std::uint64_t trials, std::uint64_t seed,
                                                   std::size_t rows, std::size_t cols,
                                                   Block&& block) {
    const std::uint64_t blocks = (trials + kSimBlockTrials - 1) / kSimBlockTrials;
    std::vector<std::vector<std::uint64_t>> total(rows, std::vector<std::uint64_t>(cols, 0));
    std::mutex merge;
    metrics_detail::parallel_for(static_cast<std::size_t>(blocks), [&](std::size_t b) {
        const std::uint64_t first = b * kSimBlockTrials;
        const std::uint64_t count = std::min(kSimBlockTrials, trials - first);
        std::vector<std::vector<std::uint64_t>> tally(rows, std::vector<std::uint64_t>(cols, 0));
        RandomStream stream(seed, b);
        block(stream, count, tally);
        std::lock_guard<std::mutex> lock(merge);
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) total[r][c] += tally[r][c];
        }
    });
    return total;
}

/// Fills empirical frequencies and the worst-entry deviation statistics.
inline void compare(SimReport& report) {
    report.empirical.clear();
    report.max_abs_dev = 0.0;
    report.sigma_bound = 0.0;
    report.max_z = 0.0;
    double worst_z = -1.0;
    for (std::size_t x = 0; x < report.counts.size(); ++x) {
        std::uint64_t n = 0;
        for (auto c : report.counts[x]) n += c;
        std::vector<double> row(report.counts[x].size(), 0.0);
        for (std::size_t y = 0; y < row.size(); ++y) {
            row[y] = n ? static_cast<double>(report.counts[x][y]) / static_cast<double>(n) : 0.0;
            if (n == 0) continue;
            const double p = report.analytic[x][y];
            const double dev = std::abs(row[y] - p);
            const double sigma = std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n));
            const double z = sigma > 0.0 ? dev / sigma : (dev > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
            if (z > worst_z) {
                worst_z = z;
                report.max_abs_dev = dev;
                report.sigma_bound = 3.0 * sigma;
                report.max_z = z;
            }
        }
        report.empirical.push_back(std::move(row));
    }
}

/// Decision sector 0..M-1 of a received phase; sector l covers
/// [(2l-1)pi/M, (2l+1)pi/M) modulo 2 pi.
inline int phase_sector(double phase, int m) {
    const double width = 2.0 * numeric::kPi / m;
    const double shifted = phase + 0.5 * width;
    auto k = static_cast<long>(std::floor(shifted / width));
    k %= m;
    if (k < 0) k += m;
    return static_cast<int>(k);
}

}  // namespace simcheck_detail

/// Sends the phase-0 PSK symbol with energy SNR (N0 = 1) through the channel
/// and sectorizes the received phase. The noncoherent detector uses the raw
/// phase; the coherent one first derotates by h*/|h|.
inline SimReport simulate_psk(const PskConfig& cfg, const ChannelSpec& spec, double snr,
                              std::uint64_t trials, std::uint64_t seed) {
    cfg.validate();
    spec.validate();
    simcheck_detail::check_trials(trials);
    if (!(snr >= 0.0) || std::isinf(snr)) throw DomainError("SNR must be finite and >= 0");
    const int m = cfg.m;
    const double amplitude = std::sqrt(snr);
    const bool coherent = spec.kind == ChannelKind::CoherentFading;

    SimReport report;
    report.scheme = "psk";
    report.params = {{"m", m},
                     {"channel", to_string(spec.kind)},
                     {"d", spec.d},
                     {"gamma_sq", spec.gamma_sq},
                     {"snr", snr}};
    report.seed = seed;
    report.trials = trials;
    report.counts = simcheck_detail::run_blocks(
        trials, seed, 1, static_cast<std::size_t>(m),
        [&](RandomStream& stream, std::uint64_t count, auto& tally) {
            for (std::uint64_t i = 0; i < count; ++i) {
                const std::complex<double> h = sample_fading(spec, stream);
                std::complex<double> r = h * amplitude + stream.complex_normal(1.0);
                if (coherent && std::abs(h) > 0.0) r *= std::conj(h) / std::abs(h);
                ++tally[0][static_cast<std::size_t>(simcheck_detail::phase_sector(std::arg(r), m))];
            }
        });
    const TransitionRow row = psk_transition_row_average(cfg, spec, snr);
    report.analytic = {row.p};
    simcheck_detail::compare(report);
    const std::vector<double> uniform(static_cast<std::size_t>(m), 1.0 / m);
    report.empirical_mi = empirical_mi(circulant_matrix(report.empirical[0]), uniform);
    report.analytic_rate = psk_capacity(cfg, spec, snr);
    return report;
}

/// Sends "off" with probability 1 - nu, otherwise a uniformly chosen tone with
/// energy SNR/nu. The detector declares "off" when the largest tone energy
/// fails the MAP threshold and otherwise picks the largest energy, breaking
/// ties uniformly. With coherent fading the threshold test uses the realized
/// |h|^2, evaluated as the equivalent likelihood comparison.
inline SimReport simulate_oofsk(const OofskConfig& cfg, const ChannelSpec& spec, double snr,
                                std::uint64_t trials, std::uint64_t seed) {
    cfg.validate();
    spec.validate();
    simcheck_detail::check_trials(trials);
    if (!(snr >= 0.0) || std::isinf(snr)) throw DomainError("SNR must be finite and >= 0");
    const int m = cfg.m;
    const auto size = static_cast<std::size_t>(m + 1);
    const double alpha_sq = snr / cfg.nu;
    const double amplitude = std::sqrt(alpha_sq);
    const bool coherent = spec.kind == ChannelKind::CoherentFading;
    const double tau = coherent ? 0.0 : detector_params(cfg, snr, spec).tau;
    const double log_prior = oofsk_detail::log_prior_ratio(cfg);

    SimReport report;
    report.scheme = "oofsk";
    report.params = {{"m", m},
                     {"nu", cfg.nu},
                     {"channel", to_string(spec.kind)},
                     {"d", spec.d},
                     {"gamma_sq", spec.gamma_sq},
                     {"snr", snr}};
    report.seed = seed;
    report.trials = trials;
    report.counts = simcheck_detail::run_blocks(
        trials, seed, size, size, [&](RandomStream& stream, std::uint64_t count, auto& tally) {
            std::vector<double> energy(static_cast<std::size_t>(m));
            for (std::uint64_t i = 0; i < count; ++i) {
                int x = 0;
                if (cfg.is_fsk() || stream.uniform() < cfg.nu) {
                    x = 1 + static_cast<int>(stream.below(static_cast<std::uint64_t>(m)));
                }
                const std::complex<double> h = sample_fading(spec, stream);
                for (int k = 0; k < m; ++k) {
                    std::complex<double> y = stream.complex_normal(1.0);
                    if (k + 1 == x) y += h * amplitude;
                    energy[static_cast<std::size_t>(k)] = std::norm(y);
                }
                int best = 0;
                int ties = 1;
                for (int k = 1; k < m; ++k) {
                    const double e = energy[static_cast<std::size_t>(k)];
                    const double eb = energy[static_cast<std::size_t>(best)];
                    if (e > eb) {
                        best = k;
                        ties = 1;
                    } else if (e == eb && stream.below(static_cast<std::uint64_t>(++ties)) == 0) {
                        best = k;
                    }
                }
                const double top = energy[static_cast<std::size_t>(best)];
                bool off;
                if (coherent) {
                    // off iff ln I0(2 sqrt(a2 e)) < ln(M(1-nu)/nu) + a2, a2 = alpha^2 |h|^2
                    const double a2 = alpha_sq * std::norm(h);
                    const double log_xi = log_prior + a2;
                    off = log_xi >= 0.0 &&
                          log_bessel_i0(2.0 * std::sqrt(a2 * top)) < log_xi;
                } else {
                    off = top < tau;
                }
                const int y = off ? 0 : best + 1;
                ++tally[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)];
            }
        });
    const TransitionMatrix t = oofsk_transitions_average(cfg, snr, spec);
    report.analytic.assign(size, std::vector<double>(size, 0.0));
    for (int x = 0; x <= m; ++x) {
        for (int y = 0; y <= m; ++y) {
            report.analytic[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] = t.at(y, x);
        }
    }
    if (cfg.is_fsk()) {
        // the off input is never sent; its row carries no information
        report.analytic[0].assign(size, 0.0);
    }
    simcheck_detail::compare(report);

    TransitionMatrix emp(m + 1);
    for (int x = 0; x <= m; ++x) {
        for (int y = 0; y <= m; ++y) {
            emp.at(y, x) = report.empirical[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)];
        }
    }
    std::vector<double> prior(size, cfg.nu / m);
    prior[0] = 1.0 - cfg.nu;
    report.empirical_mi = empirical_mi(emp, prior);
    report.analytic_rate = oofsk_rate(cfg, snr, spec);
    return report;
}

inline nlohmann::json to_json(const SimReport& r) {
    nlohmann::json j;
    j["schema"] = 1;
    j["scheme"] = r.scheme;
    j["params"] = r.params;
    j["seed"] = r.seed;
    j["trials"] = r.trials;
    j["rng"] = std::string(RandomStream::kAlgorithm);
    j["counts"] = r.counts;
    j["empirical"] = r.empirical;
    j["analytic"] = r.analytic;
    j["max_abs_dev"] = r.max_abs_dev;
    j["sigma_bound"] = r.sigma_bound;
    j["max_z"] = r.max_z;
    j["passed"] = r.passed();
    j["empirical_mi"] = r.empirical_mi;
    j["analytic_rate"] = r.analytic_rate;
    return j;
}

}  // namespace hdcap
