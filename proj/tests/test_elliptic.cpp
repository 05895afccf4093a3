#include <gtest/gtest.h>

#include <cmath>

#include "perseg/elliptic.hpp"
#include "perseg/error.hpp"
#include "support.hpp"

using namespace perseg;

namespace {

/// sup over nodes of |equation_i| / u_i for the competition system, computed from scratch.
double system_residual(const CoexistenceState& s, const SystemCoefficients& sys) {
    const auto l1 = laplacian(s.u1), l2 = laplacian(s.u2);
    double worst = 0.0;
    for (std::size_t j = 0; j < s.u1.size(); ++j) {
        const double u = s.u1[j], w = s.u2[j];
        const double kw = s.k * sys.omega[j] * u * w;
        const double r1 = -l1[j] - sys.mu1[j] * (1 - u) * u + kw;
        const double r2 = -sys.d * l2[j] - sys.mu2[j] * (1 - w) * w + sys.alpha * kw;
        worst = std::max({worst, std::abs(r1) / u, std::abs(r2) / w});
    }
    return worst;
}

}  // namespace

TEST(Newton, PolishesAssembledState) {
    const auto& s = test::reference_state(258);
    const auto sol = newton_scalar(s.coefficients, 1.0, 1.0, s.v);
    EXPECT_LT(sol.residual, 1e-9);
    EXPECT_LT((sol.z - s.v).sup_abs(), 2e-2);
    EXPECT_LE(sol.iterations, 10);
    // The strong residual evaluated independently vanishes.
    EXPECT_LT(strong_residual(sol.z, s.coefficients, 1.0, 1.0).sup_abs(), 1e-9);
}

TEST(Newton, QuadraticTail) {
    const auto sol = newton_scalar(test::reference_state(258).coefficients, 1.0, 1.0, test::reference_state(258).v);
    const auto& h = sol.history;
    ASSERT_GE(h.size(), 3u);
    for (std::size_t i = 1; i < h.size(); ++i) EXPECT_LT(h[i], h[i - 1]);
}

TEST(Newton, TrackingUnperturbedStaysPut) {
    const auto& s = test::polished_state(258);
    const auto r = perturb_and_track(s.coefficients, s);
    EXPECT_TRUE(r.inside);
    EXPECT_LT(r.distance, 1e-10);
    EXPECT_GT(r.lambda_semilinear, 0.0);
}

TEST(Newton, TrackingMollifiedCoefficients) {
    CoefficientProfile p;
    p.mollify_width = 0.01;
    p.mollify_floor = 1e-3;
    const auto r = perturb_and_track(p, test::reference_state(1026));
    EXPECT_TRUE(r.inside) << r.reason;
    EXPECT_GT(r.lambda_quasilinear, 0.0);
}

TEST(Decoupled, IdentityHolds) {
    const auto& v = test::polished_state(258);
    const auto r = solve_decoupled_t0(100.0, v);
    EXPECT_LT(r.identity_error, 1e-10);
    EXPECT_GT(r.state.u1.min(), 0.0);
    EXPECT_GT(r.state.u2.min(), 0.0);
    EXPECT_GT(r.min_excess, -1e-14);
    EXPECT_GT(r.lambda_scalar, 0.0);
    EXPECT_LT(r.coupled_residual, 1e-9);
}

TEST(Homotopy, PathReachesOne) {
    const auto& v = test::polished_state(258);
    const auto path = homotopy_path(1000.0, v);
    ASSERT_FALSE(path.empty());
    EXPECT_DOUBLE_EQ(path.front().t, 0.0);
    EXPECT_DOUBLE_EQ(path.back().t, 1.0);
    for (std::size_t i = 1; i < path.size(); ++i) EXPECT_GT(path[i].t, path[i - 1].t);
}

TEST(System, SolutionSatisfiesEquations) {
    const auto& v = test::polished_state(258);
    const auto sys = system_coefficients(v.coefficients, 1.0, 1.0);
    const double k = 100.0;
    const auto guess = v.v.map([](double x) { return std::max(x, 0.0) + 1e-4; });
    const auto guess2 = v.v.map([](double x) { return std::max(-x, 0.0) + 1e-4; });
    const auto s = solve_system(k, guess, guess2, sys);
    EXPECT_LT(system_residual(s, sys), 1e-8 * k);
    EXPECT_GT(s.u1.min(), 0.0);
    EXPECT_GT(s.u2.min(), 0.0);
}

TEST(Continuation, SegregationAndMassScaling) {
    const auto& v = test::polished_state(258);
    const auto res = continue_in_k({100.0, 1000.0}, v);
    ASSERT_TRUE(res.complete) << res.failure;
    ASSERT_EQ(res.steps.size(), 2u);
    const auto& a = res.steps[0];
    const auto& b = res.steps[1];
    EXPECT_LT(b.state.seg_distance, a.state.seg_distance);
    EXPECT_NEAR(std::log(b.state.product_mass / a.state.product_mass) / std::log(10.0), -1.0, 0.2);
    EXPECT_LT(b.decay_sup_psi, a.decay_sup_psi);
    EXPECT_NEAR(b.lambda_1k, res.lambda_weighted, 0.1 * res.lambda_weighted);
    const auto sys = system_coefficients(v.coefficients, 1.0, 1.0);
    for (const auto& s : res.steps) {
        EXPECT_LT(system_residual(s.state, sys), 1e-8 * s.state.k);
        EXPECT_LE(std::max(s.state.u1.max(), s.state.u2.max()), s.sup_bound);
        EXPECT_GE(s.lambda_1k, s.lambda_lower);
    }
}

TEST(Continuation, DefaultFirstRate) {
    EXPECT_DOUBLE_EQ(default_k0(CoefficientProfile{}), 500.0);
}

TEST(Bounds, SupBoundsShrinkTowardsTheSegregatedPair) {
    const auto& v = test::polished_state(258);
    const auto [a1, a2] = sup_bounds(v, 100.0, 0.0);
    const auto [b1, b2] = sup_bounds(v, 1e4, 0.0);
    EXPECT_LT(b1, a1);
    EXPECT_LT(b2, a2);
    EXPECT_GE(b1, v.v.max());
    EXPECT_GE(b2, -v.v.min());
}
