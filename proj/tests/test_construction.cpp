#include <gtest/gtest.h>

#include <cmath>

#include "perseg/construction.hpp"
#include "perseg/error.hpp"
#include "support.hpp"

using namespace perseg;

namespace {

// Root of Phi(1, 10, 1/2, L/6) L/6 = 3/2 with the shooting oracle.
double oracle_L0() {
    double lo = 1.0, hi = 50.0;
    while (hi - lo > 1e-11 * hi) {
        const double mid = 0.5 * (lo + hi);
        (test::shooting_phi(1.0, 10.0, 0.5, mid / 6.0, 4000) * mid / 6.0 > 1.5 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST(Threshold, L0AgreesWithShootingOracle) {
    const double L0 = find_L0(CoefficientProfile{});
    EXPECT_NEAR(L0, oracle_L0(), 1e-7 * L0);
    EXPECT_NEAR(L0, 6.99080189487, 1e-9); // frozen after the oracle comparison
}

TEST(Threshold, ReferenceValuesCoincide) {
    // With these parameters psi(upper, L) < 0 already just above L0, and L_star solves the same equation.
    const auto t = find_L_threshold(CoefficientProfile{});
    EXPECT_LE(t.L0, t.L_bar);
    EXPECT_NEAR(t.L_bar, t.L0, 1e-9 * t.L0);
    EXPECT_NEAR(t.L_star, t.L0, 1e-9 * t.L0);
}

TEST(Threshold, NuBoundsRequireLAboveL0) {
    const CoefficientProfile p;
    EXPECT_THROW(nu_bounds(0.9 * find_L0(p), p), DomainError);
    const auto b = nu_bounds(14.0, p);
    EXPECT_LT(b.lower, b.upper);
    EXPECT_NEAR(delta(b.lower, 14.0, p), -p.d, 1e-9);
    EXPECT_NEAR(delta(b.upper, 14.0, p), -p.d / 2, 1e-9);
}

TEST(Matching, RootOfPsiInsideWindow) {
    const CoefficientProfile p;
    const auto m = find_nu(14.0, p);
    EXPECT_GT(m.nu_star, m.nu_lower);
    EXPECT_LE(m.nu_star, m.nu_upper);
    EXPECT_LT(std::abs(psi(m.nu_star, 14.0, p)), 1e-8);
    EXPECT_NEAR(m.nu_image, -m.delta_at_nu / p.d, 1e-15);
}

TEST(Matching, SymmetricDeltaEqualsMinusAlphaNu) {
    const auto& s = test::reference_state();
    EXPECT_NEAR(s.matching.delta_at_nu, -s.profile.alpha * s.matching.nu_star, 1e-9);
}

TEST(Matching, BelowThresholdIsDomainError) {
    EXPECT_THROW(find_nu(5.0, CoefficientProfile{}), DomainError);
}

TEST(Assembly, RequiresAlignedGrid) {
    EXPECT_THROW(assemble_v(14.0, CoefficientProfile{}, 1024), AssemblyError);
}

TEST(Assembly, SignChangingAndBounded) {
    const auto& s = test::reference_state();
    EXPECT_GT(s.v.max(), 0.0);
    EXPECT_LT(s.v.min(), 0.0);
    EXPECT_LT(s.v.max(), s.profile.alpha);
    EXPECT_GT(s.v.min(), -s.profile.d);
    for (const auto& g : s.glue) {
        EXPECT_LE(g.value_jump, 10 * s.grid.spacing());
        EXPECT_LE(g.slope_jump, 10 * s.grid.spacing());
    }
}

TEST(Assembly, ResidualIsSecondOrder) {
    const auto& coarse = test::reference_state(258);
    const auto& fine = test::reference_state(1026);
    const double ratio = residual_weak_form(coarse).strong_l2 / residual_weak_form(fine).strong_l2;
    EXPECT_NEAR(ratio, 16.0, 1.0); // h shrinks by 4
}

TEST(Assembly, PatchInequalities) {
    const auto& s = test::reference_state();
    for (std::size_t j = 0; j < s.grid.size(); ++j) {
        if (s.coefficients.mu1[j] > 0) {
            EXPECT_GE(s.v[j], s.matching.nu_star * s.profile.alpha - 1e-12);
        }
        if (s.coefficients.mu2[j] > 0) {
            EXPECT_LE(s.v[j], -s.profile.d / 2 + 1e-12);
        }
    }
}

TEST(Assembly, BothModesAcceptTheSameV) {
    const auto& s = test::reference_state();
    CoefficientProfile combined = s.profile;
    combined.mode = CoefficientMode::combined;
    const auto c = sample_coefficients(combined, s.grid);
    const auto two = residual_weak_form(s);
    const auto comb = residual_weak_form(s.v, c, s.profile.alpha, s.profile.d, s.glue_nodes());
    EXPECT_NEAR(comb.strong_l2, two.strong_l2, 1e-12);
}

TEST(Assembly, NonSymmetricProfile) {
    CoefficientProfile p;
    p.alpha = 1.0;
    p.d = 2.0;
    p.M1 = 10.0;
    p.M2 = 5.0;
    p.r0 = 0.1;
    p.r1 = 0.2;
    p.r2 = 0.2;
    const auto t = find_L_threshold(p);
    const double L = 1.5 * t.L_bar;
    const auto s = assemble_v(L, p, aligned_node_count(1024, p));
    const double h = s.grid.spacing();
    EXPECT_LT(residual_weak_form(s).strong_l2, 10 * h * h * p.M1);
    EXPECT_GT(s.v.max(), 0.0);
    EXPECT_LT(s.v.min(), -p.d / 2);
}

TEST(Residual, DetectsWrongState) {
    const auto& s = test::reference_state();
    const auto r = residual_weak_form(0.9 * s.v, s.coefficients, s.profile.alpha, s.profile.d, s.glue_nodes());
    EXPECT_GT(r.strong_l2, 100 * residual_weak_form(s).strong_l2);
}
