#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "sobdub/constants.hpp"
#include "sobdub/error.hpp"

using namespace sobdub;

namespace {

const double kPs[] = {1.0, 1.5, 2.0, 3.0};
const double kSigmas[] = {1.5, 2.0, 3.0, 5.0};

}  // namespace

TEST(SeriesS, KnownValues) {
    EXPECT_DOUBLE_EQ(series_S(2.0), 6.0);
    EXPECT_DOUBLE_EQ(series_S(3.0), 2.75);
    EXPECT_DOUBLE_EQ(series_S(5.0), 21.0 / 16.0);
    EXPECT_DOUBLE_EQ(series_S(1.5), 14.0);
}

TEST(SeriesS, MatchesPartialSumOracle) {
    for (double sigma : kSigmas)
        EXPECT_LE(oracle::relative_error(series_S(sigma), oracle::series_S(sigma)), 1e-12) << sigma;
    for (double sigma : {2.0, 3.0, 5.0})
        EXPECT_LE(oracle::relative_error(series_S(sigma), oracle::series_S_partial(sigma)), 1e-12) << sigma;
}

TEST(SeriesS, DecreasingInSigma) {
    double last = std::numeric_limits<double>::infinity();
    for (double sigma = 1.1; sigma < 20.0; sigma += 0.1) {
        const double s = series_S(sigma);
        EXPECT_LT(s, last);
        last = s;
    }
}

TEST(K1, GridAgainstOracle) {
    for (double p : kPs)
        for (double sigma : kSigmas)
            EXPECT_LE(oracle::relative_error(K1({p, sigma}).log2, oracle::log2_K1(p, sigma)), 1e-12)
                << p << ' ' << sigma;
}

TEST(K1, ExactPowersOfTwo) {
    EXPECT_EQ(K1({2.0, 2.0}).value(), 16777216.0);
    EXPECT_EQ(K1({1.0, 2.0}).value(), 4096.0);
    EXPECT_DOUBLE_EQ(K1({1.0, 3.0}).log2, 8.25);
}

TEST(K1, IncreasingInP) {
    for (double sigma : kSigmas)
        for (double p = 1.0; p < 5.0; p += 0.5) EXPECT_LT(K1({p, sigma}).log2, K1({p + 0.5, sigma}).log2);
}

TEST(DoublingConstant, Values) {
    // c = 1/32, p = 1, sigma = 2: 2^(-5 * 2) * 2^12 = 4.
    EXPECT_DOUBLE_EQ(doubling_constant({1.0, 2.0}, 1.0 / 32.0).value(), 4.0);
    // p = 2, sigma = 2, c = 1/32: 2^(-20) * 2^24 = 16.
    EXPECT_DOUBLE_EQ(doubling_constant({2.0, 2.0}, 1.0 / 32.0).value(), 16.0);
    EXPECT_DOUBLE_EQ(doubling_constant({2.0, 2.0}, 1.0).log2, 24.0);
    for (double p : kPs)
        for (double sigma : kSigmas)
            for (double c : {0.01, 0.5, 3.0})
                EXPECT_LE(oracle::relative_error(doubling_constant({p, sigma}, c).log2,
                                                 oracle::log2_doubling_constant(p, sigma, c)),
                          1e-12);
}

TEST(DoublingConstant, FromLogAgrees) {
    for (double c : {1e-300, 1e-5, 0.3, 7.0}) {
        const auto direct = doubling_constant({1.5, 3.0}, c);
        const auto via_log = doubling_constant_from_log({1.5, 3.0}, std::log(c));
        EXPECT_NEAR(direct.log2, via_log.log2, 1e-12 * std::abs(direct.log2) + 1e-12);
    }
}

TEST(DoublingConstant, MonotoneInC) {
    EXPECT_LT(doubling_constant({2.0, 3.0}, 0.1).log2, doubling_constant({2.0, 3.0}, 0.2).log2);
}

TEST(DoublingConstant, RejectsNonPositiveC) {
    EXPECT_THROW(doubling_constant({2.0, 2.0}, 0.0), InvalidInput);
    EXPECT_THROW(doubling_constant({2.0, 2.0}, -1.0), InvalidInput);
    EXPECT_THROW(doubling_constant({2.0, 2.0}, std::nan("")), InvalidInput);
}

TEST(PositiveConstant, OverflowIsFlagged) {
    const auto huge = K1({3.0, 1.05});
    EXPECT_TRUE(huge.overflows());
    EXPECT_TRUE(std::isinf(huge.value()));
    EXPECT_NEAR(huge.ln(), huge.log2 * std::log(2.0), 1e-9 * huge.ln());
    EXPECT_FALSE(K1({2.0, 2.0}).overflows());
}

TEST(Subelliptic, Beta) {
    EXPECT_EQ(subelliptic_beta({2.0, 2.0, 8.0}), 1.5);
    EXPECT_DOUBLE_EQ(subelliptic_beta({1.0, 3.0, 6.0}), 2.5);
}

TEST(Subelliptic, RejectsCriticalExponent) {
    // s = p sigma' gives beta = 1.
    EXPECT_THROW(subelliptic_beta({2.0, 2.0, 4.0}), InvalidInput);
    EXPECT_THROW(subelliptic_beta({1.0, 3.0, 1.5}), InvalidInput);
    EXPECT_THROW(subelliptic_beta({2.0, 2.0, 3.0}), InvalidInput);
}

TEST(Subelliptic, ConstantValues) {
    // beta = 1.5, K = 1, N = 2: 2^(4 / 0.5) * 2^(4 * 1.5 / 0.25) = 2^32.
    EXPECT_EQ(subelliptic_doubling_constant({2.0, 2.0, 8.0, 1.0, 2.0}).value(), 4294967296.0);
    for (double K : {0.0, 1.0, 3.0})
        for (double N : {1.5, 2.0, 4.0}) {
            SubellipticParams params{2.0, 3.0, 10.0, K, N};
            EXPECT_LE(oracle::relative_error(subelliptic_doubling_constant(params).log2,
                                             oracle::log2_subelliptic_constant(2.0, 3.0, subelliptic_beta(params), K, N)),
                      1e-12);
        }
}

TEST(Subelliptic, MonotoneInKAndN) {
    EXPECT_LT(subelliptic_doubling_constant({2.0, 2.0, 8.0, 1.0, 2.0}).log2,
              subelliptic_doubling_constant({2.0, 2.0, 8.0, 2.0, 2.0}).log2);
    EXPECT_LT(subelliptic_doubling_constant({2.0, 2.0, 8.0, 1.0, 2.0}).log2,
              subelliptic_doubling_constant({2.0, 2.0, 8.0, 1.0, 3.0}).log2);
}

TEST(Validation, Rejections) {
    EXPECT_THROW((SobolevParams{0.5, 2.0}.validate()), InvalidInput);
    EXPECT_THROW((SobolevParams{2.0, 1.0}.validate()), InvalidInput);
    EXPECT_THROW((SobolevParams{std::nan(""), 2.0}.validate()), InvalidInput);
    EXPECT_THROW((SobolevParams{2.0, std::numeric_limits<double>::infinity()}.validate()), InvalidInput);
    EXPECT_NO_THROW((SobolevParams{1.0, 1.01}.validate()));
    EXPECT_THROW((SubellipticParams{2.0, 2.0, 8.0, -1.0}.validate()), InvalidInput);
    EXPECT_THROW((SubellipticParams{2.0, 2.0, 8.0, 1.0, 1.0}.validate()), InvalidInput);
    EXPECT_THROW((SubellipticParams{2.0, 2.0, 8.0, 1.0, 2.0, 1.0}.validate()), InvalidInput);
    EXPECT_THROW((SubellipticParams{2.0, 2.0, 8.0, 1.0, 2.0, 0.0}.validate()), InvalidInput);
    EXPECT_THROW(K1({0.5, 2.0}), InvalidInput);
}
