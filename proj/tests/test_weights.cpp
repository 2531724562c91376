#include <nsqstab/weights.hpp>

#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace nsqstab;

namespace {

WeightProblem random_problem(oracle::Rng& rng, const std::vector<int>& sizes, double lo = 0.1, double hi = 10.0)
{
    WeightProblem wp;
    wp.groups = Partition(sizes);
    std::size_t n = 1;
    for (int s : sizes) n *= static_cast<std::size_t>(s);
    for (int s : sizes) {
        std::vector<double> lam(n);
        for (double& x : lam) x = rng.log_uniform(lo, hi);
        wp.lambdas.push_back(lam);
        std::vector<double> k(static_cast<std::size_t>(s - 1));
        for (double& x : k) x = rng.log_uniform(lo, hi);
        wp.ratios.push_back(k);
    }
    return wp;
}

// max relative ratio error computed through the brute-force oracle
double oracle_ratio_error(const WeightProblem& wp, const std::vector<double>& gammas)
{
    double worst = 0.0;
    const std::vector<int>& sizes = wp.groups.sizes();
    for (int g = 0; g < wp.groups.blocks(); ++g) {
        const auto& lam = wp.lambdas[static_cast<std::size_t>(g)];
        const double first = oracle::payoff_bruteforce(sizes, gammas, lam, g, 0);
        for (int j = 1; j < sizes[static_cast<std::size_t>(g)]; ++j) {
            const double target = wp.ratios[static_cast<std::size_t>(g)][static_cast<std::size_t>(j - 1)];
            const double got = oracle::payoff_bruteforce(sizes, gammas, lam, g, j) / first;
            worst = std::max(worst, std::abs(got - target) / target);
        }
    }
    return worst;
}

}  // namespace

TEST(Weights, PayoffSingleGroup)
{
    const WeightProblem wp = WeightProblem::uniform_lambdas(Partition({2}), {{2.0}});
    const WeightSystem ws{{1.0, 2.0}, 1.0};
    EXPECT_EQ(payoff(ws, wp, 0, 0), 1.0);
    EXPECT_EQ(payoff(ws, wp, 0, 1), 2.0);
    EXPECT_THROW(payoff(ws, wp, 0, 2), Error);
    EXPECT_THROW(payoff(ws, wp, 1, 0), Error);
}

TEST(Weights, PayoffUniform)
{
    const WeightProblem wp = WeightProblem::uniform_lambdas(Partition({2, 2}), {{1.0}, {1.0}});
    const WeightSystem ws{{1, 1, 1, 1}, 1.0};
    for (int g = 0; g < 2; ++g)
        for (int j = 0; j < 2; ++j) EXPECT_EQ(payoff(ws, wp, g, j), 2.0);
}

TEST(Weights, PayoffMatchesBruteForce)
{
    oracle::Rng rng(31);
    const WeightProblem wp = random_problem(rng, {3, 2, 3});
    std::vector<double> gammas(18);
    for (double& x : gammas) x = rng.uniform(0.1, 10.0);
    const WeightSystem ws{gammas, gammas[0]};
    for (int g = 0; g < 3; ++g)
        for (int j = 0; j < wp.groups.size(g); ++j) {
            const double expected = oracle::payoff_bruteforce({3, 2, 3}, gammas, wp.lambdas[static_cast<std::size_t>(g)], g, j);
            EXPECT_NEAR(payoff(ws, wp, g, j), expected, 1e-12 * expected);
        }
}

TEST(Weights, ConstructSingleGroup)
{
    const WeightSystem ws = construct_weights(WeightProblem::uniform_lambdas(Partition({2}), {{2.0}}));
    ASSERT_EQ(ws.gammas.size(), 2u);
    EXPECT_NEAR(ws.gammas[0], 1.0, 1e-15);
    EXPECT_NEAR(ws.gammas[1], 2.0, 1e-15);
}

TEST(Weights, ConstructSymmetric)
{
    const WeightProblem wp = WeightProblem::uniform_lambdas(Partition({2, 2}), {{1.0}, {1.0}});
    const WeightSystem ws = construct_weights(wp);
    for (double g : ws.gammas) EXPECT_NEAR(g, 1.0, 1e-15);
    EXPECT_NEAR(payoff(ws, wp, 1, 1), 2.0, 1e-15);
    EXPECT_EQ(verify_ratios(ws, wp), 0.0);
}

TEST(Weights, ConstructThreeTwoThree)
{
    oracle::Rng rng(32);
    for (int trial = 0; trial < 50; ++trial) {
        const WeightProblem wp = random_problem(rng, {3, 2, 3});
        const WeightSystem ws = construct_weights(wp);
        ASSERT_EQ(ws.gammas.size(), 18u);
        for (double g : ws.gammas) EXPECT_GT(g, 0.0);
        EXPECT_LT(oracle_ratio_error(wp, ws.gammas), 1e-9);
        EXPECT_LT(verify_ratios(ws, wp), 1e-12);
    }
}

TEST(Weights, PositivityOverShapes)
{
    oracle::Rng rng(33);
    const std::vector<std::vector<int>> shapes{{1}, {4}, {1, 3}, {2, 1, 2}, {4, 3, 2, 3}, {1, 1, 1}, {3, 3, 3}};
    for (const auto& shape : shapes)
        for (int trial = 0; trial < 10; ++trial) {
            const WeightProblem wp = random_problem(rng, shape, 1e-2, 1e2);
            const WeightSystem ws = construct_weights(wp);
            for (double g : ws.gammas) EXPECT_GT(g, 0.0);
            EXPECT_LT(oracle_ratio_error(wp, ws.gammas), 1e-9);
        }
}

TEST(Weights, BaseHomogeneity)
{
    oracle::Rng rng(34);
    const WeightProblem wp = random_problem(rng, {3, 2, 3});
    const WeightSystem one = construct_weights(wp);
    for (double c : {0.25, 3.0, 1e4}) {
        const WeightSystem scaled = construct_weights(wp, {c});
        EXPECT_EQ(scaled.base, c);
        for (std::size_t i = 0; i < one.gammas.size(); ++i) EXPECT_NEAR(scaled.gammas[i], c * one.gammas[i], 1e-13 * c * one.gammas[i]);
        EXPECT_LT(verify_ratios(scaled, wp), 1e-12);
    }
}

TEST(Weights, GroupOneTermwise)
{
    oracle::Rng rng(35);
    const std::vector<int> sizes{3, 2, 3};
    const WeightProblem wp = random_problem(rng, sizes);
    const WeightSystem ws = construct_weights(wp, {1.0, WeightOptions::Space::Linear});
    const std::size_t tail = 6;
    const auto& lam = wp.lambdas[0];
    for (std::size_t alpha = 0; alpha < tail; ++alpha)
        for (std::size_t j = 1; j < 3; ++j) {
            const double lhs = ws.gammas[j * tail + alpha] * lam[j * tail + alpha];
            const double rhs = wp.ratios[0][j - 1] * ws.gammas[alpha] * lam[alpha];
            EXPECT_NEAR(lhs, rhs, 1e-13 * rhs);
        }
}

TEST(Weights, LogAndLinearAgree)
{
    oracle::Rng rng(36);
    const WeightProblem wp = random_problem(rng, {4, 3, 2, 3}, 1e-3, 1e3);
    const WeightSystem lin = construct_weights(wp, {1.0, WeightOptions::Space::Linear});
    const WeightSystem log = construct_weights(wp, {1.0, WeightOptions::Space::Log});
    for (std::size_t i = 0; i < lin.gammas.size(); ++i) EXPECT_NEAR(log.gammas[i], lin.gammas[i], 1e-10 * lin.gammas[i]);
    EXPECT_LT(verify_ratios(log, wp), 1e-9);
}

TEST(Weights, WideDynamicRange)
{
    oracle::Rng rng(37);
    const WeightProblem wp = random_problem(rng, {3, 3, 3}, 1e-6, 1e6);
    const WeightSystem ws = construct_weights(wp);
    for (double g : ws.gammas) {
        EXPECT_GT(g, 0.0);
        EXPECT_TRUE(std::isfinite(g));
    }
    EXPECT_LT(oracle_ratio_error(wp, ws.gammas), 1e-9);
}

TEST(Weights, VerifyRatiosDetectsPerturbation)
{
    oracle::Rng rng(38);
    const WeightProblem wp = random_problem(rng, {3, 2, 3});
    WeightSystem ws = construct_weights(wp);
    EXPECT_LT(verify_ratios(ws, wp), 1e-12);
    ws.gammas[7] *= 1.01;
    EXPECT_GT(verify_ratios(ws, wp), 1e-5);
}

TEST(Weights, VerifyRatiosExact)
{
    const WeightProblem wp = WeightProblem::uniform_lambdas(Partition({2, 3}), {{1.0}, {1.0, 1.0}});
    const WeightSystem ws{std::vector<double>(6, 1.0), 1.0};
    EXPECT_EQ(verify_ratios(ws, wp), 0.0);
}

TEST(Weights, RejectsNonPositiveInputs)
{
    WeightProblem wp = WeightProblem::uniform_lambdas(Partition({2, 2}), {{1.0}, {0.0}});
    EXPECT_THROW(construct_weights(wp), Error);
    wp = WeightProblem::uniform_lambdas(Partition({2, 2}), {{1.0}, {1.0}});
    wp.lambdas[1][2] = -1.0;
    EXPECT_THROW(construct_weights(wp), Error);
    wp.lambdas[1][2] = 1.0;
    EXPECT_THROW(construct_weights(wp, {0.0}), Error);
    wp.ratios[0].push_back(1.0);
    EXPECT_THROW(construct_weights(wp), Error);
}
