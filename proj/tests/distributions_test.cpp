#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "talim/stats/distributions.hpp"

using talim::stats::incomplete_beta;
using talim::stats::student_t_two_tailed;

TEST(IncompleteBeta, ClosedForms) {
    // I_x(1, 1) = x; I_x(a, 1) = x^a; I_x(1, b) = 1 - (1-x)^b.
    for (double x : {0.01, 0.2, 0.5, 0.77, 0.99}) {
        EXPECT_NEAR(incomplete_beta(1.0, 1.0, x), x, 1e-14);
        EXPECT_NEAR(incomplete_beta(3.5, 1.0, x), std::pow(x, 3.5), 1e-13);
        EXPECT_NEAR(incomplete_beta(1.0, 2.5, x), 1.0 - std::pow(1.0 - x, 2.5), 1e-13);
    }
    EXPECT_EQ(incomplete_beta(2.0, 3.0, 0.0), 0.0);
    EXPECT_EQ(incomplete_beta(2.0, 3.0, 1.0), 1.0);
}

TEST(IncompleteBeta, Symmetry) {
    for (double x : {0.1, 0.4, 0.6, 0.95})
        EXPECT_NEAR(incomplete_beta(2.3, 5.1, x), 1.0 - incomplete_beta(5.1, 2.3, 1.0 - x), 1e-13);
}

TEST(StudentT, AgainstQuadratureOracle) {
    for (double df : {1.0, 2.0, 6.0, 12.0, 30.0}) {
        for (double t : {0.0, 0.3, 1.0, 2.2, 4.0, 9.0}) {
            EXPECT_NEAR(student_t_two_tailed(t, df), oracle::student_t_two_tailed(t, df), 1e-10)
                << "t=" << t << " df=" << df;
        }
    }
}

TEST(StudentT, KnownCriticalValues) {
    // Two-tailed 5% critical values.
    EXPECT_NEAR(student_t_two_tailed(12.706204736, 1.0), 0.05, 1e-8);
    EXPECT_NEAR(student_t_two_tailed(2.228138852, 10.0), 0.05, 1e-8);
    EXPECT_NEAR(student_t_two_tailed(3.054539589, 12.0), 0.01, 1e-8);
    // df = 1 is Cauchy: p = 1 - 2 atan(t) / pi.
    EXPECT_NEAR(student_t_two_tailed(3.0, 1.0), 1.0 - 2.0 * std::atan(3.0) / M_PI, 1e-13);
}
