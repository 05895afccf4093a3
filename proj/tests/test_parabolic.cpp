#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "perseg/error.hpp"
#include "perseg/parabolic.hpp"
#include "support.hpp"

using namespace perseg;

namespace {

Coefficients zero_coefficients(const PeriodicGrid& g) {
    return {Field::constant(g, 0.0), Field::constant(g, 0.0), Field::constant(g, 1.0)};
}

// Error at t = 1 of the scheme against the exact semi-discrete decay of a Fourier mode.
double heat_error(Scheme scheme, double dt) {
    const double L = 2 * std::numbers::pi;
    const PeriodicGrid g(L, 64);
    const double h = g.spacing();
    const auto z0 = Field::from_function(g, [](double x) { return std::cos(x); });
    const double mu = 4.0 / (h * h) * std::pow(std::sin(h / 2), 2);
    EvolutionConfig cfg;
    cfg.dt = dt;
    cfg.t_end = 1.0;
    cfg.scheme = scheme;
    const auto tr = evolve_semilinear(z0, zero_coefficients(g), 1.0, 1.0, cfg);
    return (tr.snapshots.back()[0] - std::exp(-mu) * z0).sup_abs();
}

}  // namespace

TEST(Config, Validation) {
    EvolutionConfig cfg;
    cfg.dt = 0.0;
    try {
        cfg.validate();
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.key(), "dt");
    }
    cfg = EvolutionConfig{};
    cfg.record_every = 0;
    EXPECT_THROW(cfg.validate(), ValidationError);
}

TEST(Config, ReactionCapEnforced) {
    const auto& s = test::polished_state(258);
    EXPECT_DOUBLE_EQ(reaction_dt_cap(s.coefficients, 1.0, 1.0), 0.05);
    EvolutionConfig cfg;
    cfg.dt = 0.06;
    EXPECT_THROW(evolve_semilinear(s.v, s.coefficients, 1.0, 1.0, cfg), ValidationError);
}

TEST(Refinement, BackwardEulerFirstOrder) {
    const double e1 = heat_error(Scheme::imex_be, 0.1), e2 = heat_error(Scheme::imex_be, 0.05);
    EXPECT_NEAR(e1 / e2, 2.0, 0.15);
}

TEST(Refinement, CrankNicolsonSecondOrder) {
    const double e1 = heat_error(Scheme::imex_cn, 0.1), e2 = heat_error(Scheme::imex_cn, 0.05);
    EXPECT_NEAR(e1 / e2, 4.0, 0.3);
}

TEST(Semilinear, SteadyStateIsStationary) {
    const auto& s = test::polished_state(258);
    EvolutionConfig cfg;
    cfg.t_end = 2.0;
    const auto tr = evolve_semilinear(s.v, s.coefficients, 1.0, 1.0, cfg);
    EXPECT_LT((tr.snapshots.back()[0] - s.v).sup_abs(), 1e-10);
}

TEST(Semilinear, OrderPreservation) {
    const auto& s = test::polished_state(258);
    EvolutionConfig cfg;
    cfg.t_end = 3.0;
    cfg.record_every = 5;
    const auto bump = multimode_bump(s.grid, 3);
    const auto lower = evolve_semilinear(s.v - 0.2 * bump.map([](double b) { return 1.0 + b; }), s.coefficients, 1.0,
                                         1.0, cfg);
    const auto upper = evolve_semilinear(s.v + 0.1 * bump.map([](double b) { return 1.0 + b; }), s.coefficients, 1.0,
                                         1.0, cfg);
    for (std::size_t i = 0; i < lower.times.size(); ++i)
        EXPECT_GE((upper.snapshots[i][0] - lower.snapshots[i][0]).min(), 0.0) << "t = " << lower.times[i];
}

TEST(Quasilinear, CoincidesWithSemilinearOnPositiveData) {
    const auto& s = test::polished_state(258);
    const auto z0 = multimode_bump(s.grid, 5).map([](double b) { return 0.5 + 0.2 * b; });
    EvolutionConfig cfg;
    cfg.t_end = 1.0;
    const auto a = evolve_semilinear(z0, s.coefficients, 1.0, 1.0, cfg);
    const auto b = evolve_quasilinear(z0, s.coefficients, 1.0, 1.0, cfg);
    ASSERT_EQ(a.times.size(), b.times.size());
    for (std::size_t i = 0; i < a.times.size(); ++i)
        EXPECT_EQ(a.snapshots[i][0].vector(), b.snapshots[i][0].vector());
}

TEST(Quasilinear, DiffersOnNegativeDataWhenDIsNotOne) {
    const PeriodicGrid g(2.0, 64);
    const auto z0 = Field::from_function(g, [](double x) { return std::cos(std::numbers::pi * x); });
    EvolutionConfig cfg;
    cfg.t_end = 0.2;
    const auto a = evolve_semilinear(z0, zero_coefficients(g), 1.0, 2.0, cfg);
    const auto b = evolve_quasilinear(z0, zero_coefficients(g), 1.0, 2.0, cfg);
    EXPECT_GT((a.snapshots.back()[0] - b.snapshots.back()[0]).sup_abs(), 1e-3);
}

TEST(Recording, SnapshotTimesAndObserver) {
    const PeriodicGrid g(1.0, 16);
    EvolutionConfig cfg;
    cfg.dt = 0.1;
    cfg.t_end = 1.0;
    cfg.record_every = 3;
    const auto z0 = Field::constant(g, 0.1);
    const auto tr = evolve_semilinear(z0, zero_coefficients(g), 1.0, 1.0, cfg);
    ASSERT_EQ(tr.times.size(), 5u); // 0, 0.3, 0.6, 0.9 and the final time
    EXPECT_NEAR(tr.times.back(), 1.0, 1e-12);
    int calls = 0;
    const auto stopped = evolve_semilinear(z0, zero_coefficients(g), 1.0, 1.0, cfg,
                                           [&](double, const std::vector<Field>&) { return ++calls < 4; });
    EXPECT_EQ(calls, 4);
    EXPECT_NEAR(stopped.times.back(), 0.4, 1e-12);
}

TEST(System, StaysNonnegativeAndRejectsNegativeData) {
    const auto& s = test::polished_state(258);
    const auto sys = system_coefficients(s.coefficients, 1.0, 1.0);
    const auto u1 = s.v.map([](double x) { return std::max(x, 0.0); });
    const auto u2 = s.v.map([](double x) { return std::max(-x, 0.0); });
    EvolutionConfig cfg;
    cfg.t_end = 1.0;
    const auto tr = evolve_system(u1, u2, 1000.0, sys, cfg);
    for (const auto& snap : tr.snapshots) {
        EXPECT_GE(snap[0].min(), 0.0);
        EXPECT_GE(snap[1].min(), 0.0);
    }
    EXPECT_THROW(evolve_system(-1.0 * u1 - u2, u2, 1000.0, sys, cfg), InvalidArgument);
    cfg.dt = 0.1;
    EXPECT_THROW(evolve_system(u1, u2, 1000.0, sys, cfg), ValidationError);
}

TEST(Probe, BumpIsDeterministicWithUnitSup) {
    const PeriodicGrid g(3.0, 200);
    const auto a = multimode_bump(g, 9), b = multimode_bump(g, 9), c = multimode_bump(g, 10);
    EXPECT_EQ(a.vector(), b.vector());
    EXPECT_NE(a.vector(), c.vector());
    EXPECT_NEAR(a.sup_abs(), 1.0, 1e-15);
}

TEST(Probe, FitRecoversExponent) {
    std::vector<double> t, y;
    for (int i = 0; i <= 30; ++i) {
        t.push_back(0.1 * i);
        y.push_back(3.0 * std::exp(-2.5 * t.back()));
    }
    EXPECT_NEAR(fit_decay_rate(t, y), 2.5, 1e-10);
}

TEST(Probe, SemilinearDecayMatchesEigenvalue) {
    const auto& s = test::polished_state(258);
    EvolutionConfig cfg;
    cfg.t_end = 8.0;
    const auto r = stability_probe(s.v, s.coefficients, 1.0, 1.0, Sense::semilinear, 0.04, cfg);
    EXPECT_TRUE(r.eigenfunction.returned);
    EXPECT_LT(r.eigenfunction.relative_error, 0.2);
    EXPECT_LT(r.multimode.relative_error, 0.2);
}

TEST(SmallPeriod, ThresholdClosedForm) {
    const auto& s = test::polished_state(258);
    const auto sys = system_coefficients(s.coefficients, 1.0, 1.0);
    EXPECT_NEAR(small_period_threshold(sys), 2 * std::numbers::pi / std::sqrt(10.0), 1e-14);
}
