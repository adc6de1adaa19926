#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string_view>

namespace hdcap {

using PhiloxCounter = std::array<std::uint64_t, 4>;
using PhiloxKey = std::array<std::uint64_t, 2>;

/// Philox4x64 with 10 rounds (Salmon et al., Random123). Pure function of
/// (counter, key); bit-identical on every platform.
inline PhiloxCounter philox4x64_10(PhiloxCounter ctr, PhiloxKey key) {
    constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
    constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
    constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
    constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        const unsigned __int128 p0 = static_cast<unsigned __int128>(kMul0) * ctr[0];
        const unsigned __int128 p1 = static_cast<unsigned __int128>(kMul1) * ctr[2];
        const auto hi0 = static_cast<std::uint64_t>(p0 >> 64);
        const auto lo0 = static_cast<std::uint64_t>(p0);
        const auto hi1 = static_cast<std::uint64_t>(p1 >> 64);
        const auto lo1 = static_cast<std::uint64_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

/// Counter-based random stream. A stream is identified by (seed, substream);
/// distinct substreams are statistically independent, which is how Monte Carlo
/// work is partitioned without shared state.
class RandomStream {
public:
    static constexpr std::string_view kAlgorithm = "philox4x64-10/box-muller";

    explicit RandomStream(std::uint64_t seed, std::uint64_t substream = 0)
        : key_{seed, substream} {}

    std::uint64_t next_u64() {
        if (pos_ == 4) {
            block_ = philox4x64_10(counter_, key_);
            if (++counter_[0] == 0) ++counter_[1];
            pos_ = 0;
        }
        return block_[pos_++];
    }

    /// Uniform on the open interval (0, 1) with 53-bit resolution.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    /// Standard normal variate by the Box-Muller transform.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double radius = std::sqrt(-2.0 * std::log(uniform()));
        const double angle = 6.28318530717958647692 * uniform();
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    /// Circularly symmetric complex Gaussian with E|z|^2 = variance.
    std::complex<double> complex_normal(double variance = 1.0) {
        const double s = std::sqrt(0.5 * variance);
        const double re = normal();
        const double im = normal();
        return {s * re, s * im};
    }

private:
    PhiloxKey key_;
    PhiloxCounter counter_{0, 0, 0, 0};
    PhiloxCounter block_{};
    int pos_ = 4;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace hdcap
