#include <hdcap/numeric.hpp>

#include <gtest/gtest.h>

#include <cmath>

namespace num = hdcap::numeric;

TEST(CompensatedSum, RecoversCancelledTerms) {
    num::CompensatedSum s;
    s.add(1e16);
    s.add(1.0);
    s.add(-1e16);
    EXPECT_EQ(s.value(), 1.0);
}

TEST(Integrate, PolynomialAndGaussian) {
    const auto r = num::integrate([](double x) { return x * x; }, 0.0, 3.0, 1e-14, 1e-13);
    EXPECT_NEAR(r.value, 9.0, 1e-12);
    const auto g = num::integrate([](double x) { return std::exp(-x * x); }, -10.0, 10.0, 1e-14, 1e-13);
    EXPECT_NEAR(g.value, std::sqrt(num::kPi), 1e-12);
}

TEST(Integrate, NarrowIntervalsReachTightRelativeTolerance) {
    // short intervals must not be held to an unscaled error floor
    const double w = 0.0129099;
    const auto r = num::integrate([](double x) { return std::exp(-3000.0 * x * x); }, 0.0, w, 0.0, 1e-13);
    const double exact = 0.5 * std::sqrt(num::kPi / 3000.0) * std::erf(std::sqrt(3000.0) * w);
    EXPECT_NEAR(r.value / exact, 1.0, 1e-13);
    const auto sine = num::integrate([](double x) { return std::sin(x); }, 1.0, 1.0 + 1e-6, 0.0, 1e-14);
    EXPECT_NEAR(sine.value / (std::cos(1.0) - std::cos(1.0 + 1e-6)), 1.0, 1e-9);
}

TEST(Integrate, EmptyInterval) {
    EXPECT_EQ(num::integrate([](double) { return 1.0; }, 2.0, 2.0, 1e-12, 1e-12).value, 0.0);
}

TEST(Integrate, ThrowsWhenToleranceUnreachable) {
    const auto wild = [](double x) { return std::sin(1.0 / x) / x; };
    EXPECT_THROW(num::integrate(wild, 1e-6, 1.0, 1e-15, 1e-15, 3), hdcap::NumericError);
}

TEST(SolveBracketed, FindsRootAndRejectsBadBracket) {
    const double r = num::solve_bracketed([](double x) { return x * x - 2.0; }, 0.0, 2.0);
    EXPECT_NEAR(r, std::sqrt(2.0), 1e-14);
    EXPECT_THROW(num::solve_bracketed([](double x) { return x * x + 1.0; }, 0.0, 2.0),
                 hdcap::NumericError);
}

TEST(ExpandUpperBracket, GrowsUntilLevel) {
    const double hi = num::expand_upper_bracket([](double x) { return x; }, 100.0, 1.0);
    EXPECT_GE(hi, 100.0);
    EXPECT_LT(hi, 200.0);
    EXPECT_THROW(num::expand_upper_bracket([](double) { return 0.0; }, 1.0, 1.0, 1e10),
                 hdcap::NumericError);
}

TEST(GoldenSection, FindsParabolaVertex) {
    const auto m = num::golden_section_minimize([](double x) { return (x - 1.3) * (x - 1.3) + 2.0; },
                                                -5.0, 5.0, 1e-8);
    EXPECT_NEAR(m.x, 1.3, 1e-7);
    EXPECT_NEAR(m.fx, 2.0, 1e-12);
}

TEST(LogBinomial, MatchesSmallCases) {
    EXPECT_NEAR(num::log_binomial(10, 3), std::log(120.0), 1e-12);
    EXPECT_NEAR(num::log_binomial(47, 0), 0.0, 1e-12);
}
