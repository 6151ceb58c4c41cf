#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "subforest/sampling.hpp"
#include "subforest/theory.hpp"

namespace sf = subforest;

TEST(Theory, ClosedFormConstantsAtDimensionOne) {
    EXPECT_EQ(sf::beta_of(1), 0.25);
    EXPECT_NEAR(sf::lemma_constant(1), std::exp(12.0), 1e-6 * std::exp(12.0));
    EXPECT_NEAR(sf::c3_constant(1, 1.0, 1.0), 12.0, 1e-9);
    EXPECT_NEAR(sf::rate_exponent(1), -2.0 / 3.0, 1e-12);
    EXPECT_NEAR(sf::min_subsample_size(1, 1000, 1.0, 1.0).exponent, 1.0 / 3.0, 1e-12);
    // frozen: -3 / (4 ln 2 + 3)
    EXPECT_NEAR(sf::centred_rate_exponent(1), -0.51969751256347798, 1e-12);
}

TEST(Theory, RiskBoundValues) {
    // frozen high-precision evaluation of 2*32/1024 + e^12 * 0.25^5
    EXPECT_NEAR(sf::risk_bound(1, 1024, 1.0, 1.0, 5.0), 159.00272599512102,
                1e-6 * 159.00272599512102);
    EXPECT_EQ(sf::risk_bound(1, 1024, 0.0, 0.0, 5.0), 0.0);
    EXPECT_EQ(sf::risk_bound(3, 100, 0.0, 0.0, 0.0), 0.0);
    // k = 0: 2 sigma2 / n + d L^2 C
    const double v = sf::risk_bound(2, 100, 1.0, 1.0, 0.0);
    EXPECT_NEAR(v, 2.0 / 100.0 + 2.0 * sf::lemma_constant(2), 1e-12 * v);
    EXPECT_THROW(sf::risk_bound(0, 100, 1.0, 1.0, 0.0), std::invalid_argument);
    EXPECT_THROW(sf::risk_bound(1, 100, -1.0, 1.0, 0.0), std::invalid_argument);
}

TEST(Theory, OptimalDepth) {
    const auto choice = sf::optimal_depth(1, 1024, 1.0, 1.0);
    EXPECT_NEAR(choice.k_real, 9.1041134968891870, 1e-9); // (ln 1024 + 12)/(3 ln 2)
    EXPECT_TRUE(choice.k_int == 9 || choice.k_int == 10);

    // integer choice beats both neighbors
    auto master = sf::derive_stream(500, 0);
    for (int c = 0; c < 50; ++c) {
        const std::size_t d = 1 + master.next_below(10);
        const double n = 16.0 + static_cast<double>(master.next_below(100000));
        const double sigma2 = 0.01 + master.next_unit() * 4.0;
        const double L = 0.1 + master.next_unit() * 5.0;
        const auto k = sf::optimal_depth(d, n, sigma2, L);
        const double here = sf::risk_bound(d, n, sigma2, L, static_cast<double>(k.k_int));
        if (k.k_int > 0) {
            EXPECT_GE(sf::risk_bound(d, n, sigma2, L, static_cast<double>(k.k_int - 1)), here);
        }
        EXPECT_GE(sf::risk_bound(d, n, sigma2, L, static_cast<double>(k.k_int + 1)), here);
    }
    EXPECT_THROW(sf::optimal_depth(1, 100, 0.0, 1.0), std::invalid_argument);
    EXPECT_THROW(sf::optimal_depth(1, 100, 1.0, 0.0), std::invalid_argument);
}

TEST(Theory, DepthShiftsByTwoThirdsWhenNQuadruples) {
    for (double n : {256.0, 1000.0, 5000.0}) {
        const double k1 = sf::optimal_depth(1, n, 1.3, 0.7).k_real;
        const double k2 = sf::optimal_depth(1, 4.0 * n, 1.3, 0.7).k_real;
        EXPECT_NEAR(k2 - k1, 2.0 / 3.0, 1e-12);
    }
}

TEST(Theory, MinSubsampleSize) {
    const auto s = sf::min_subsample_size(1, 1000, 1.0, 1.0);
    EXPECT_NEAR(s.c4, 4.0 * std::exp(4.0), 1e-9 * s.c4); // 218.3926...
    EXPECT_NEAR(s.raw, 2183.9260013257696, 1e-6 * s.raw);
    EXPECT_TRUE(s.clamped);
    EXPECT_EQ(s.value, 1000.0);

    const auto big = sf::min_subsample_size(1, 1.0e9, 1.0, 1.0);
    EXPECT_FALSE(big.clamped);
    EXPECT_NEAR(big.value, big.c4 * 1000.0, 1e-6 * big.value);

    // L -> 2L multiplies C4 by 4^exponent
    const auto s1 = sf::min_subsample_size(3, 1000, 0.7, 1.1);
    const auto s2 = sf::min_subsample_size(3, 1000, 0.7, 2.2);
    EXPECT_NEAR(s2.c4 / s1.c4, std::pow(4.0, s1.exponent), 1e-9 * s2.c4 / s1.c4);
}

TEST(Theory, RateExponentsOrderedAcrossDimensions) {
    for (std::size_t d = 1; d <= 50; ++d) {
        const double median = sf::rate_exponent(d);
        const double centred = sf::centred_rate_exponent(d);
        EXPECT_LT(median, centred) << "d = " << d; // median forests are faster
        EXPECT_LT(centred, 0.0) << "d = " << d;
        if (d >= 2) {
            EXPECT_GT(median, -2.0 / 3.0) << "d = " << d;
        }
    }
}

TEST(Theory, BoundIsConvexAndMonotone) {
    auto master = sf::derive_stream(501, 0);
    for (int c = 0; c < 20; ++c) {
        const std::size_t d = 1 + master.next_below(8);
        const double n = 64.0 + static_cast<double>(master.next_below(10000));
        const double sigma2 = 0.01 + master.next_unit() * 2.0;
        const double L = 0.1 + master.next_unit() * 3.0;
        const double k_star = sf::optimal_depth(d, n, sigma2, L).k_real;
        const double at_star =
            sf::risk_bound(d, n, sigma2, L, std::max(0.0, k_star));
        for (double k = 0.0; k <= 30.0; k += 0.1)
            ASSERT_GE(sf::risk_bound(d, n, sigma2, L, k), at_star - 1e-12 * at_star);

        // increasing in sigma2 and L, decreasing in n
        const double base = sf::risk_bound(d, n, sigma2, L, 4.0);
        EXPECT_GT(sf::risk_bound(d, n, sigma2 * 1.5, L, 4.0), base);
        EXPECT_GT(sf::risk_bound(d, n, sigma2, L * 1.5, 4.0), base);
        EXPECT_LT(sf::risk_bound(d, n * 2.0, sigma2, L, 4.0), base);
    }
}

TEST(Theory, ApproxWeightVariant) {
    sf::TheoryOptions d32;
    d32.weight = sf::ApproxWeight::d_three_halves;
    const double lin = sf::risk_bound(4, 100, 1.0, 1.0, 3.0);
    const double heavy = sf::risk_bound(4, 100, 1.0, 1.0, 3.0, d32);
    // the d^(3/2) variant inflates only the approximation term by sqrt(d)
    const double approx = sf::approximation_term(4, 1.0, 1.0, 3.0);
    EXPECT_NEAR(heavy - lin, approx * (std::sqrt(4.0) - 1.0), 1e-9 * heavy);
}

TEST(Theory, ExactSideSecondMoment) {
    EXPECT_EQ(sf::exact_side_second_moment(std::vector<std::size_t>{17}, 3), 1.0);
    // d=1, chain (2,1): the Beta(2,1) second moment
    EXPECT_DOUBLE_EQ(sf::exact_side_second_moment(std::vector<std::size_t>{2, 1}, 1), 0.5);
    // d=2 mixes with the untouched-axis case
    EXPECT_DOUBLE_EQ(sf::exact_side_second_moment(std::vector<std::size_t>{2, 1}, 2), 0.75);
    EXPECT_THROW(sf::exact_side_second_moment(std::vector<std::size_t>{4, 3}, 1),
                 std::invalid_argument);
    EXPECT_THROW(sf::exact_side_second_moment(std::vector<std::size_t>{}, 1),
                 std::invalid_argument);
}

TEST(Theory, ExactMomentObeysLemmaBound) {
    // 500 random admissible chains stay below C beta^k
    auto master = sf::derive_stream(502, 0);
    for (int c = 0; c < 500; ++c) {
        const std::size_t d = 1 + master.next_below(10);
        std::vector<std::size_t> chain{8 + master.next_below(4089)};
        const std::size_t k = 1 + master.next_below(8);
        for (std::size_t j = 0; j < k && chain.back() >= 2; ++j)
            chain.push_back(1 + master.next_below(chain.back() / 2));
        const double exact = sf::exact_side_second_moment(chain, d);
        const double bound = sf::lemma_constant(d) *
                             std::pow(sf::beta_of(d), static_cast<double>(chain.size() - 1));
        ASSERT_LE(exact, bound * (1.0 + 1e-12)) << "d=" << d;
    }
}

TEST(Theory, McSideSecondMomentDegenerateDepth) {
    const auto res = sf::mc_side_second_moment(8, 0, 2, 100, 3);
    EXPECT_EQ(res.estimate, 1.0);
    EXPECT_EQ(res.std_error, 0.0);
    EXPECT_EQ(res.exact_chain_average, 1.0);
}

TEST(Theory, McMatchesExactChainAverage) {
    // random-path descent makes the beta product exact conditionally on
    // the chain; 3 SE agreement
    const auto res = sf::mc_side_second_moment(256, 3, 1, 10000, 7);
    EXPECT_NEAR(res.estimate, res.exact_chain_average, 3.0 * res.std_error);
    EXPECT_LE(res.estimate, res.lemma_bound + 3.0 * res.std_error);
}

TEST(Theory, FixedCenterDescentIsLengthBiased) {
    // the cell of the cube center is systematically wider than the beta
    // product predicts; this is why the default descent is the random path
    const auto res = sf::mc_side_second_moment(128, 1, 1, 4000, 11,
                                               sf::DescentMode::fixed_center);
    EXPECT_GT(res.estimate, res.exact_chain_average + 10.0 * res.std_error);
    // frozen from the Beta(65,64) computation: E[max(Z,1-Z)^2] = 0.28713
    EXPECT_NEAR(res.estimate, 0.28713, 0.005);
}

TEST(Theory, McChainsAreRecorded) {
    std::vector<std::vector<std::size_t>> chains;
    std::vector<double> sides;
    const auto res = sf::mc_side_second_moment(64, 2, 2, 50, 5, sf::DescentMode::random_path,
                                               1, &chains, &sides);
    ASSERT_EQ(chains.size(), 50u);
    ASSERT_EQ(sides.size(), 50u);
    double chain_mean = 0.0;
    for (const auto& chain : chains) {
        ASSERT_EQ(chain.size(), 3u);
        ASSERT_EQ(chain[0], 64u);
        chain_mean += sf::exact_side_second_moment(chain, 2);
    }
    EXPECT_NEAR(chain_mean / 50.0, res.exact_chain_average, 1e-12);
    EXPECT_THROW(sf::mc_side_second_moment(16, 3, 1, 10, 1), std::invalid_argument);
}
