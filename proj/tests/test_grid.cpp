#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "perseg/error.hpp"
#include "perseg/grid.hpp"

using namespace perseg;

TEST(Profile, ReferenceIsValidAndSymmetric) {
    CoefficientProfile p;
    EXPECT_NO_THROW(p.validate());
    EXPECT_TRUE(p.symmetric());
}

TEST(Profile, GeometryViolationNamesR2) {
    CoefficientProfile p;
    p.r2 = 0.2;
    try {
        p.validate();
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.key(), "r2");
    }
}

TEST(Profile, NonpositiveRateNamesKey) {
    CoefficientProfile p;
    p.M1 = 0.0;
    try {
        p.validate();
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.key(), "M1");
    }
}

TEST(Profile, NormalizeRates) {
    const auto [M1, M2] = normalize_rates(6.0, 8.0, 2.0, 2.0);
    EXPECT_DOUBLE_EQ(M1, 3.0);
    EXPECT_DOUBLE_EQ(M2, 2.0);
}

TEST(Grid, ReferenceCountAlignsEveryBreakpoint) {
    CoefficientProfile p;
    EXPECT_EQ(aligned_node_count(1024, p), 1026u); // first multiple of 6 above 1024
    EXPECT_EQ(aligned_node_count(256, p), 258u);
    const auto g = build_grid(10.0, 1026, p);
    EXPECT_TRUE(g.aligned());
    EXPECT_LT(g.max_snap_error(), 1e-12);
    const auto bps = p.breakpoints();
    for (std::size_t i = 0; i < bps.size(); ++i)
        EXPECT_NEAR(g.x(g.breakpoint_nodes()[i]), bps[i] * 10.0, 1e-12);
}

TEST(Grid, UnalignedCountIsReported) {
    const auto g = build_grid(10.0, 1024, CoefficientProfile{});
    EXPECT_FALSE(g.aligned());
}

TEST(Field, RejectsMismatchedCells) {
    const PeriodicGrid a(1.0, 16), b(2.0, 16);
    EXPECT_THROW(Field::constant(a, 1.0) + Field::constant(b, 1.0), InvalidArgument);
}

TEST(Field, RejectsNonfiniteValues) {
    const PeriodicGrid g(1.0, 16);
    std::vector<double> v(16, 0.0);
    v[5] = NAN;
    EXPECT_THROW(Field(g, v), InvalidArgument);
    EXPECT_THROW(PeriodicGrid(1.0, 8), InvalidArgument);
}

TEST(Laplacian, DiscreteEigenfunction) {
    // cos(2 pi m x / L) is an exact eigenvector with eigenvalue -(4/h^2) sin^2(pi m h / L).
    const double L = 3.0;
    const PeriodicGrid g(L, 128);
    const double h = g.spacing();
    for (int m : {1, 5, 17}) {
        const auto f = Field::from_function(g, [&](double x) { return std::cos(2 * std::numbers::pi * m * x / L); });
        const double mu = -4.0 / (h * h) * std::pow(std::sin(std::numbers::pi * m * h / L), 2);
        EXPECT_LT((laplacian(f) - mu * f).sup_abs(), 1e-9 * std::abs(mu));
    }
}

TEST(Norms, ConstantAndSine) {
    const PeriodicGrid g(2.0, 400);
    const auto c = norms(Field::constant(g, -3.0), 0.5);
    EXPECT_DOUBLE_EQ(c.sup, 3.0);
    EXPECT_NEAR(c.l2, 3.0 * std::sqrt(2.0), 1e-12);
    EXPECT_DOUBLE_EQ(c.lipschitz, 3.0); // sup plus a zero seminorm
    const auto s = Field::from_function(g, [](double x) { return std::sin(std::numbers::pi * x); });
    const auto n = norms(s, 0.5);
    EXPECT_NEAR(n.sup, 1.0, 1e-4);
    EXPECT_NEAR(n.l2, 1.0, 1e-9); // sqrt of int_0^2 sin^2
    EXPECT_GT(n.holder, n.sup);
    EXPECT_NEAR(n.lipschitz - n.sup, std::numbers::pi, 1e-3);
}

TEST(Parts, DecompositionAndSigma) {
    const PeriodicGrid g(1.0, 100);
    const auto v = Field::from_function(g, [](double x) { return std::sin(2 * std::numbers::pi * x); });
    const auto [pos, neg] = pos_neg_parts(v);
    EXPECT_EQ((pos - neg - v).sup_abs(), 0.0);
    EXPECT_GE(pos.min(), 0.0);
    EXPECT_GE(neg.min(), 0.0);
    const auto [sigma, sigma_hat] = sigma_fields(v, 4.0);
    for (std::size_t j = 0; j < g.size(); ++j) {
        EXPECT_EQ(sigma[j], v[j] >= 0.0 ? 1.0 : 0.25);
        EXPECT_EQ(sigma_hat[j], v[j] >= 0.0 ? 1.0 : 4.0);
    }
}

TEST(Coefficients, TwoPatchSupport) {
    CoefficientProfile p;
    const auto g = build_grid(6.0, 1026, p);
    const auto c = sample_coefficients(p, g);
    std::size_t n1 = 0, n2 = 0;
    for (std::size_t j = 0; j < g.size(); ++j) {
        n1 += c.mu1[j] > 0.0;
        n2 += c.mu2[j] > 0.0;
        EXPECT_FALSE(c.mu1[j] > 0.0 && c.mu2[j] > 0.0);
        EXPECT_EQ(c.omega[j], 1.0);
    }
    EXPECT_EQ(n1, 342u); // 2 r1 of the nodes
    EXPECT_EQ(n2, 342u); // 2 r2 of the nodes
    EXPECT_EQ(c.mu1.max(), 10.0);
}

TEST(Mollify, PreservesMassAndRespectsFloor) {
    CoefficientProfile p;
    const auto g = build_grid(6.0, 1026, p);
    const auto mu1 = sample_coefficients(p, g).mu1;
    const auto smooth = mollify(mu1, 0.01, 0.0);
    EXPECT_NEAR(smooth.integral(), mu1.integral(), 1e-12 * mu1.integral());
    EXPECT_LE(smooth.max(), mu1.max() + 1e-12);
    const auto floored = mollify(mu1, 0.01, 1e-3);
    EXPECT_GE(floored.min(), 1e-3);
    EXPECT_THROW(mollify(mu1, 0.3, 0.0), InvalidArgument);
}

TEST(Mollify, ProfileSamplingUsesWidth) {
    CoefficientProfile p;
    p.mollify_width = 0.01;
    p.mollify_floor = 1e-3;
    const auto g = build_grid(6.0, 1026, p);
    const auto c = sample_coefficients(p, g);
    EXPECT_GE(c.mu2.min(), 1e-3);
    EXPECT_LT(c.mu1[171], 10.0); // breakpoint node is smoothed
}
