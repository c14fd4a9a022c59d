#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "talim/stats/correlation.hpp"

using talim::stats::FeatureMatrix;
using talim::stats::Matrix;

namespace {

FeatureMatrix make(const std::vector<std::vector<double>>& rows) {
    FeatureMatrix m;
    m.values = Matrix::from_rows(rows);
    for (std::size_t i = 0; i < m.values.rows(); ++i) m.row_ids.push_back("r" + std::to_string(i));
    for (std::size_t j = 0; j < m.values.cols(); ++j) m.col_ids.push_back("c" + std::to_string(j));
    return m;
}

} // namespace

TEST(Pearson, IdenticalColumns) {
    const auto c = talim::stats::pearson(make({{1, 1}, {2, 2}, {5, 5}, {3, 3}}));
    EXPECT_DOUBLE_EQ(c.r(0, 1), 1.0);
    EXPECT_EQ(c.p_values(0, 1), 0.0);
    EXPECT_EQ(talim::stats::significance_stars(c.p_values(0, 1)), "**");
}

TEST(Pearson, HandComputedPointEight) {
    const auto c = talim::stats::pearson(make({{1, 1}, {2, 3}, {3, 2}, {4, 4}}));
    EXPECT_NEAR(c.r(0, 1), 0.8, 1e-12);
    EXPECT_EQ(c.n, 4u);
}

TEST(Pearson, SymmetricUnitDiagonal) {
    std::mt19937 rng(4);
    std::normal_distribution<double> g;
    std::vector<std::vector<double>> rows(10, std::vector<double>(5));
    for (auto& r : rows)
        for (double& v : r) v = g(rng);
    const auto m = make(rows);
    const auto c = talim::stats::pearson(m);
    for (std::size_t a = 0; a < 5; ++a) {
        EXPECT_EQ(c.r(a, a), 1.0);
        EXPECT_EQ(c.p_values(a, a), 0.0);
        for (std::size_t b = 0; b < 5; ++b) {
            EXPECT_EQ(c.r(a, b), c.r(b, a));
            EXPECT_LE(std::abs(c.r(a, b)), 1.0);
        }
    }
}

TEST(Pearson, MatchesTwoPassOracle) {
    std::mt19937 rng(10);
    std::normal_distribution<double> g(3.0, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::vector<double>> rows(10, std::vector<double>(5));
        for (auto& r : rows)
            for (double& v : r) v = g(rng);
        const auto m = make(rows);
        const auto c = talim::stats::pearson(m);
        for (std::size_t a = 0; a < 5; ++a)
            for (std::size_t b = a + 1; b < 5; ++b)
                EXPECT_NEAR(c.r(a, b), oracle::pearson(m.values.column(a), m.values.column(b)), 1e-12);
    }
}

TEST(Pearson, SignificanceOfPublishedStrokeCorrelation) {
    const double r = 0.969, n = 14;
    const double t = r * std::sqrt((n - 2) / (1 - r * r));
    EXPECT_NEAR(t, 13.6, 0.05);
    const double p = talim::stats::correlation_p_value(r, 14);
    EXPECT_LT(p, 0.01);
    EXPECT_EQ(talim::stats::significance_stars(p), "**");
}

TEST(Pearson, PValueShape) {
    for (std::size_t n : {3u, 4u, 8u, 14u, 100u}) EXPECT_NEAR(talim::stats::correlation_p_value(0.0, n), 1.0, 1e-9);
    for (std::size_t n : {5u, 8u, 14u}) {
        double prev = 2.0;
        for (double r = 0.0; r < 1.0; r += 0.01) {
            const double p = talim::stats::correlation_p_value(r, n);
            EXPECT_LT(p, prev);
            EXPECT_NEAR(p, talim::stats::correlation_p_value(-r, n), 1e-15);
            prev = p;
        }
    }
    EXPECT_EQ(talim::stats::significance_stars(0.03), "*");
    EXPECT_EQ(talim::stats::significance_stars(0.2), "");
}

TEST(Pearson, ZeroVarianceNamesColumn) {
    auto m = make({{1, 7}, {2, 7}, {3, 7}});
    m.col_ids = {"pitch", "attack_time"};
    try {
        talim::stats::pearson(m);
        FAIL();
    } catch (const talim::Error& e) {
        EXPECT_EQ(e.code(), talim::ErrorCode::ZeroVariance);
        EXPECT_NE(std::string(e.what()).find("attack_time"), std::string::npos);
    }
}

TEST(Pearson, InvalidShapes) {
    EXPECT_THROW(talim::stats::pearson(make({{1, 2}, {2, 3}})), talim::Error);
    EXPECT_THROW(talim::stats::pearson(make({{1}, {2}, {3}})), talim::Error);
}
