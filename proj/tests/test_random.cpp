#include <hdcap/random.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

using hdcap::PhiloxCounter;
using hdcap::RandomStream;
using hdcap::philox4x64_10;

// Known answers produced by numpy.random.Philox (the reference Random123 port).
TEST(Philox, MatchesReferenceBlocks) {
    const PhiloxCounter a = philox4x64_10({1, 0, 0, 0}, {42, 7});
    EXPECT_EQ(a[0], 0xa64064f34e84b9a3ULL);
    EXPECT_EQ(a[1], 0xe287959a866a08fdULL);
    EXPECT_EQ(a[2], 0x8dc181f009b96c03ULL);
    EXPECT_EQ(a[3], 0xf3f6001d4fa83454ULL);

    const PhiloxCounter b = philox4x64_10({2, 0, 0, 0}, {42, 7});
    EXPECT_EQ(b[0], 0x69c633ee791df6b3ULL);
    EXPECT_EQ(b[1], 0x89327f7a8f0127a4ULL);
    EXPECT_EQ(b[2], 0x1ed8260458996ff6ULL);
    EXPECT_EQ(b[3], 0x4299f7433fb1683eULL);

    const PhiloxCounter c =
        philox4x64_10({0, 6, 0, 0}, {0x0123456789abcdefULL, 0xfedcba9876543210ULL});
    EXPECT_EQ(c[0], 0x18ea6664568b9c1eULL);
    EXPECT_EQ(c[1], 0xb7b92c13b67e3805ULL);
    EXPECT_EQ(c[2], 0x581c68ad89cf1fa5ULL);
    EXPECT_EQ(c[3], 0x22bf456ce2a14616ULL);
}

TEST(RandomStream, WalksCounterFromZero) {
    RandomStream s(42, 7);
    const PhiloxCounter first = philox4x64_10({0, 0, 0, 0}, {42, 7});
    for (auto w : first) EXPECT_EQ(s.next_u64(), w);
    const PhiloxCounter second = philox4x64_10({1, 0, 0, 0}, {42, 7});
    for (auto w : second) EXPECT_EQ(s.next_u64(), w);
}

TEST(RandomStream, SameKeySameSequence) {
    RandomStream a(5, 3);
    RandomStream b(5, 3);
    for (int i = 0; i < 1000; ++i) EXPECT_EQ(a.normal(), b.normal());
}

TEST(RandomStream, SubstreamsDiffer) {
    RandomStream a(5, 0);
    RandomStream b(5, 1);
    int equal = 0;
    for (int i = 0; i < 100; ++i) equal += a.next_u64() == b.next_u64();
    EXPECT_EQ(equal, 0);
}

TEST(RandomStream, UniformIsOpenInterval) {
    RandomStream s(1);
    for (int i = 0; i < 100000; ++i) {
        const double u = s.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}

TEST(RandomStream, BelowCoversRange) {
    RandomStream s(9);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 1000; ++i) {
        const auto v = s.below(7);
        ASSERT_LT(v, 7u);
        seen.insert(v);
    }
    EXPECT_EQ(seen.size(), 7u);
}

TEST(RandomStream, NormalMoments) {
    RandomStream s(2024);
    const int n = 400000;
    double sum = 0.0;
    double sq = 0.0;
    double quart = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = s.normal();
        sum += x;
        sq += x * x;
        quart += x * x * x * x;
    }
    // 5 sigma bounds for the sample moments
    EXPECT_NEAR(sum / n, 0.0, 5.0 / std::sqrt(n));
    EXPECT_NEAR(sq / n, 1.0, 5.0 * std::sqrt(2.0 / n));
    EXPECT_NEAR(quart / n, 3.0, 5.0 * std::sqrt(96.0 / n));
}

TEST(RandomStream, ComplexNormalVariance) {
    RandomStream s(77);
    const int n = 200000;
    double power = 0.0;
    double cross = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto z = s.complex_normal(2.5);
        power += std::norm(z);
        cross += z.real() * z.imag();
    }
    EXPECT_NEAR(power / n, 2.5, 5.0 * 2.5 / std::sqrt(n));
    EXPECT_NEAR(cross / n, 0.0, 5.0 * 1.25 / std::sqrt(n));
}
