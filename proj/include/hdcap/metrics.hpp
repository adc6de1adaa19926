#pragma once

// Bit energy, spectral efficiency and SNR sweeps with minimum-bit-energy search.

#include <hdcap/channel.hpp>
#include <hdcap/errors.hpp>
#include <hdcap/numeric.hpp>
#include <hdcap/oofsk.hpp>
#include <hdcap/psk.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>
#include <variant>
#include <vector>

namespace hdcap {

struct CurvePoint {
    double snr;
    double rate_nats;
    double spectral_eff;  ///< bits/s/Hz
    double eb_n0_db;      ///< +inf when the rate is zero
};

struct SweepResult {
    std::vector<CurvePoint> points;
    double min_eb_db;
    double se_at_min;
    double snr_at_min;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

/// 10 log10(scale * SNR * ln 2 / rate). A zero rate gives +inf.
inline double bit_energy_db(double snr, double rate_nats, double scale = 1.0) {
    if (!(rate_nats >= 0.0)) throw DomainError("bit_energy_db: negative rate");
    if (rate_nats == 0.0) return std::numeric_limits<double>::infinity();
    return linear_to_db(scale * snr * numeric::kLn2 / rate_nats);
}

/// Spectral efficiency on the wideband line through (Eb/N0 at zero SE, S0).
inline double linear_se_approx(double eb_db, const LowSnrSummary& summary) {
    const double se = summary.s0 / (10.0 * std::log10(2.0)) * (eb_db - summary.eb_n0_zero_se_db);
    return std::max(0.0, se);
}

using Scheme = std::variant<PskConfig, OofskConfig>;

/// Signal dimensions per symbol: 1 for PSK, M for (OO)FSK.
inline double scheme_dimension(const Scheme& scheme) {
    if (const auto* o = std::get_if<OofskConfig>(&scheme)) return o->m;
    return 1.0;
}

/// Rate in nats per symbol at the given SNR.
inline double scheme_rate(const Scheme& scheme, const ChannelSpec& spec, double snr) {
    if (const auto* p = std::get_if<PskConfig>(&scheme)) return psk_capacity(*p, spec, snr);
    return oofsk_rate(std::get<OofskConfig>(scheme), snr, spec);
}

/// Received-energy scale E|h|^2 used to normalize bit energy.
inline double received_energy_scale(const ChannelSpec& spec) { return rician_moments(spec).m2; }

inline CurvePoint make_curve_point(const Scheme& scheme, double snr, double rate, double scale) {
    return {snr, rate, rate * numeric::kLog2e / scheme_dimension(scheme),
            bit_energy_db(snr, rate, scale)};
}

/// Log-spaced SNR grid between two dB values, inclusive.
inline std::vector<double> snr_grid_db(double min_db, double max_db, int points) {
    if (points < 2 || !(max_db > min_db)) throw UsageError("SNR grid needs >= 2 points and max > min");
    std::vector<double> grid(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
        grid[static_cast<std::size_t>(i)] = db_to_linear(min_db + (max_db - min_db) * i / (points - 1));
    }
    return grid;
}

inline constexpr double kDefaultGridMinDb = -50.0;
inline constexpr double kDefaultGridMaxDb = 20.0;
inline constexpr int kDefaultGridPoints = 60;
inline constexpr double kRefineToleranceDb = 0.001;

inline std::vector<double> default_snr_grid() {
    return snr_grid_db(kDefaultGridMinDb, kDefaultGridMaxDb, kDefaultGridPoints);
}

namespace metrics_detail {

inline double evaluate(const Scheme& scheme, const ChannelSpec& spec, double snr) {
    try {
        return scheme_rate(scheme, spec, snr);
    } catch (const std::exception& e) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "rate evaluation failed at SNR " << snr << " (" << linear_to_db(snr)
            << " dB): " << e.what();
        throw NumericError(msg.str());
    }
}

/// Runs f(i) for i in [0, n) on up to hardware_concurrency threads; the first
/// exception is rethrown after all workers stop.
template <class F>
void parallel_for(std::size_t n, F&& f) {
    const std::size_t workers =
        std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next = n;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace metrics_detail

/// Evaluates the scheme over an ascending SNR grid and locates the minimum
/// bit energy: coarse scan, then golden-section search in dB inside the
/// cells adjacent to the coarse minimizer. `scale` converts transmitted SNR
/// into the energy that bit energy is quoted against.
inline SweepResult sweep(const Scheme& scheme, const ChannelSpec& spec,
                         const std::vector<double>& snr_grid, double scale) {
    if (snr_grid.size() < 2) throw UsageError("sweep needs at least two SNR points");
    for (std::size_t i = 0; i < snr_grid.size(); ++i) {
        if (!(snr_grid[i] > 0.0) || (i > 0 && !(snr_grid[i] > snr_grid[i - 1]))) {
            throw UsageError("SNR grid must be positive and strictly ascending");
        }
    }
    if (!(scale > 0.0)) throw DomainError("energy scale must be positive");

    SweepResult out{};
    out.points.resize(snr_grid.size());
    metrics_detail::parallel_for(snr_grid.size(), [&](std::size_t i) {
        const double snr = snr_grid[i];
        out.points[i] = make_curve_point(scheme, snr, metrics_detail::evaluate(scheme, spec, snr), scale);
    });

    std::size_t best = 0;
    for (std::size_t i = 1; i < out.points.size(); ++i) {
        if (out.points[i].eb_n0_db < out.points[best].eb_n0_db) best = i;
    }
    CurvePoint winner = out.points[best];
    if (std::isfinite(winner.eb_n0_db)) {
        const double lo = linear_to_db(snr_grid[best == 0 ? 0 : best - 1]);
        const double hi = linear_to_db(snr_grid[std::min(best + 1, snr_grid.size() - 1)]);
        CurvePoint refined = winner;
        const auto objective = [&](double snr_db) {
            const double snr = db_to_linear(snr_db);
            const CurvePoint p =
                make_curve_point(scheme, snr, metrics_detail::evaluate(scheme, spec, snr), scale);
            if (p.eb_n0_db < refined.eb_n0_db) refined = p;
            return p.eb_n0_db;
        };
        numeric::golden_section_minimize(objective, lo, hi, kRefineToleranceDb);
        winner = refined;
    }
    out.min_eb_db = winner.eb_n0_db;
    out.se_at_min = winner.spectral_eff;
    out.snr_at_min = winner.snr;
    return out;
}

inline SweepResult sweep(const Scheme& scheme, const ChannelSpec& spec,
                         const std::vector<double>& snr_grid) {
    return sweep(scheme, spec, snr_grid, received_energy_scale(spec));
}

}  // namespace hdcap
