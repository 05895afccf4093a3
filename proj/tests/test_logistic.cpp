#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "perseg/error.hpp"
#include "perseg/logistic.hpp"
#include "support.hpp"

using namespace perseg;

TEST(Profile, BoundaryValuesAndSymmetry) {
    const auto p = solve_profile(2.0, 3.0, 0.6, 1.5, 1001);
    ASSERT_EQ(p.n % 2, 0u); // rounded up to even
    EXPECT_DOUBLE_EQ(p.values.front(), 1.2);
    EXPECT_DOUBLE_EQ(p.values.back(), 1.2);
    for (std::size_t i = 0; i <= p.n; ++i) EXPECT_NEAR(p.values[i], p.values[p.n - i], 1e-13);
    EXPECT_GT(p.center_value(), 1.2);
    EXPECT_LT(p.center_value(), 2.0);
}

TEST(Phi, MatchesShootingOracle) {
    struct Case {
        double A, M, nu, R;
    };
    for (const Case c : {Case{1, 1, 0.5, 1}, Case{1, 10, 0.7, 0.8}, Case{2, 3, 0.6, 1.5}, Case{0.5, 20, 0.9, 0.3}}) {
        const double ref = test::shooting_phi(c.A, c.M, c.nu, c.R);
        EXPECT_NEAR(phi(c.A, c.M, c.nu, c.R), ref, 1e-7 * ref) << c.A << ' ' << c.M << ' ' << c.nu << ' ' << c.R;
    }
}

TEST(Phi, GammaLimitClosedForm) {
    EXPECT_NEAR(gamma_limit(1, 1, 0.5), std::sqrt(1.0 / 6.0), 1e-15);
    for (double A : {0.5, 1.0, 3.0})
        for (double nu : {0.5, 0.75, 0.95}) EXPECT_NEAR(gamma_limit(A, 7.0, nu), test::closed_form_gamma(A, 7.0, nu), 1e-13);
}

TEST(Phi, HalfLineApproachesGamma) {
    for (double nu : {0.5, 0.8}) {
        const double g = gamma_limit(1.0, 10.0, nu);
        EXPECT_NEAR(phi_half_line(1.0, 10.0, nu), g, 1e-4 * g);
    }
}

TEST(Phi, MonotoneInRandNu) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> A(0.5, 2), M(1, 20), nu(0.5, 0.9), R(0.1, 3);
    for (int i = 0; i < 10; ++i) {
        const double a = A(rng), m = M(rng), n = nu(rng), r = R(rng);
        const double base = phi(a, m, n, r);
        EXPECT_GT(phi(a, m, n, 1.5 * r), base);
        EXPECT_LT(phi(a, m, n + 0.05, r), base);
        EXPECT_LT(base, gamma_limit(a, m, n));
    }
}

TEST(Phi, TableFlagsNothingOnTheReferenceGrid) {
    const auto t = phi_table(1, 1, {0.5, 0.6, 0.7, 0.8, 0.9}, {1, 2, 4, 8, 16});
    EXPECT_TRUE(t.ok());
    EXPECT_TRUE(t.violations.empty());
}

TEST(Phi, TableRejectsUnsortedLists) {
    EXPECT_THROW(phi_table(1, 1, {0.6, 0.5}, {1, 2}), InvalidArgument);
}

TEST(Slope, EnergyAndDifferenceAgree) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> A(0.5, 2), M(1, 20), nu(0.5, 0.95), R(0.1, 5);
    for (int i = 0; i < 20; ++i) {
        const auto s = boundary_slope(solve_profile(A(rng), M(rng), nu(rng), R(rng)));
        const double tol = std::max(1e-6, 10 * s.scaled_spacing * s.scaled_spacing);
        EXPECT_LE(std::abs(s.finite_difference - s.energy), tol * s.energy);
    }
}

TEST(Phi, InvalidArguments) {
    EXPECT_THROW(phi(1, 1, 1.0, 1), InvalidArgument);
    EXPECT_THROW(phi(1, 1, 0.5, -1), InvalidArgument);
    EXPECT_THROW(phi(-1, 1, 0.5, 1), InvalidArgument);
}
