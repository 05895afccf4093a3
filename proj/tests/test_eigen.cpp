#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dense_eigen.hpp"
#include "perseg/eigen.hpp"
#include "perseg/error.hpp"
#include "perseg/system.hpp"
#include "support.hpp"

using namespace perseg;

namespace {

Field random_field(const PeriodicGrid& g, std::uint64_t seed, double lo, double hi) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(g.size());
    for (double& x : v) x = u(rng);
    return Field(g, std::move(v));
}

Eigen::VectorXd to_vector(const Field& f) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(f.size()));
    for (std::size_t j = 0; j < f.size(); ++j) v[static_cast<Eigen::Index>(j)] = f[j];
    return v;
}

}  // namespace

TEST(Scalar, ConstantPotential) {
    const PeriodicGrid g(2.0, 64);
    const auto r = principal_scalar(Field::constant(g, 3.0));
    EXPECT_NEAR(r.lambda, -3.0, 1e-12);
    const auto& phi = r.eigenfunctions[0];
    EXPECT_NEAR(phi.max() - phi.min(), 0.0, 1e-10);
}

TEST(Scalar, MatchesDenseOracle) {
    const PeriodicGrid g(5.0, 96);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto q = random_field(g, seed, -20.0, 20.0);
        const auto r = principal_scalar(q);
        EXPECT_NEAR(r.lambda, oracle::dense_symmetric_min(oracle::to_dense(scalar_operator(q))), 1e-8);
        EXPECT_GT(r.eigenfunctions[0].min(), 0.0);
    }
}

TEST(Weighted, MatchesDenseOracle) {
    const PeriodicGrid g(5.0, 96);
    const auto q = random_field(g, 4, -5.0, 15.0);
    const auto w = random_field(g, 5, 0.2, 3.0);
    const auto r = principal_weighted(q, w);
    const double ref = oracle::dense_generalized_min(oracle::to_dense(scalar_operator(q)), to_vector(w));
    EXPECT_NEAR(r.lambda, ref, 1e-8);
}

TEST(Weighted, SegregatedStateBothSensesPositive) {
    const auto& s = test::reference_state(258);
    const auto q = f1_of(s.v, s.coefficients, 1.0, 1.0);
    const auto sigma = sigma_fields(s.v, 1.0).first;
    const auto semi = principal_scalar(q);
    const auto quasi = principal_weighted(q, sigma);
    EXPECT_GT(semi.lambda, 0.0);
    EXPECT_GT(quasi.lambda, 0.0);
    EXPECT_GT(semi.lambda, gradient_energy(semi.eigenfunctions[0], Field::constant(s.grid, 1.0)));
    const auto A = oracle::to_dense(scalar_operator(q));
    EXPECT_NEAR(semi.lambda, oracle::dense_symmetric_min(A), 1e-8);
    EXPECT_NEAR(quasi.lambda, oracle::dense_generalized_min(A, to_vector(sigma)), 1e-8);
}

TEST(Potential, F1Values) {
    const PeriodicGrid g(1.0, 16);
    std::vector<double> values(16, 0.0);
    values[0] = 0.5;
    values[2] = -0.25;
    const Field v(g, values);
    const Coefficients c{Field::constant(g, 2.0), Field::constant(g, 4.0), Field::constant(g, 1.0)};
    const auto q = f1_of(v, c, 1.0, 2.0);
    EXPECT_DOUBLE_EQ(q[0], 2.0 * (1.0 - 1.0)); // mu1 (alpha - 2 v)
    EXPECT_DOUBLE_EQ(q[1], 0.0);
    EXPECT_DOUBLE_EQ(q[2], 4.0 * (2.0 - 0.5)); // mu2 (d + 2 v)
}

TEST(System, MatchesDenseOracle) {
    const PeriodicGrid g(3.0, 48);
    const auto u1 = random_field(g, 6, 0.1, 0.9);
    const auto u2 = random_field(g, 7, 0.1, 0.9);
    SystemCoefficients sys{Field::constant(g, 10.0), Field::constant(g, 8.0), Field::constant(g, 1.0), 1.5, 0.7};
    const double k = 5.0;
    const auto r = principal_system(u1, u2, k, sys);
    const auto raw = oracle::to_dense(system_operator(u1.values(), u2.values(), k, sys, false));
    EXPECT_NEAR(r.lambda, oracle::dense_min_real(raw), 1e-8);
    // Cooperative form: no positive off-diagonal entries.
    const auto coop = oracle::to_dense(system_operator(u1.values(), u2.values(), k, sys, true));
    for (Eigen::Index i = 0; i < coop.rows(); ++i)
        for (Eigen::Index j = 0; j < coop.cols(); ++j)
            if (i != j) {
                EXPECT_LE(coop(i, j), 0.0);
            }
    EXPECT_GT(r.eigenfunctions[0].min(), 0.0);
    EXPECT_GT(r.eigenfunctions[1].min(), 0.0);
}

TEST(System, NormalizationOfZ) {
    const auto& s = test::polished_state(258);
    const auto sys = system_coefficients(s.coefficients, 1.0, 1.0);
    const auto u1 = s.v.map([](double x) { return std::max(x, 0.0) + 1e-3; });
    const auto u2 = s.v.map([](double x) { return std::max(-x, 0.0) + 1e-3; });
    const auto r = principal_system(u1, u2, 10.0, sys);
    const auto Z = sys.alpha * r.eigenfunctions[0] + sys.d * r.eigenfunctions[1];
    EXPECT_NEAR(Z.max(), 1.0, 1e-12);
}

TEST(Dirichlet, ConstantPotentialClosedForm) {
    const PeriodicGrid g(2.0, 50);
    const double h = g.spacing();
    for (std::size_t cells : {1u, 3u}) {
        const auto r = principal_dirichlet(Field::constant(g, 1.5), 0.37, cells);
        const double ell = cells * 2.0;
        const double exact = -1.5 + 4.0 / (h * h) * std::pow(std::sin(std::numbers::pi * h / (2.0 * ell)), 2);
        EXPECT_NEAR(r.lambda, exact, 1e-9);
        EXPECT_EQ(r.eigenfunctions[0].size(), cells * 50);
        EXPECT_EQ(r.eigenfunctions[0][0], 0.0);
    }
}

TEST(Dirichlet, AbovePeriodicAndConverging) {
    const auto& s = test::reference_state(258);
    const auto q = f1_of(s.v, s.coefficients, 1.0, 1.0);
    const double per = principal_scalar(q).lambda;
    const double y = s.grid.x(s.grid.breakpoint_nodes()[1]) + s.matching.nu_star / s.matching.phi1_at_nu;
    const double one = principal_dirichlet(q, y, 1).lambda;
    const double three = principal_dirichlet(q, y, 3).lambda;
    EXPECT_GT(one, per);
    EXPECT_LT(three - per, one - per);
}

TEST(ZMatrix, RejectsNonpositiveWeights) {
    const PeriodicGrid g(1.0, 16);
    const auto A = scalar_operator(Field::constant(g, 0.0));
    std::vector<double> w(16, 1.0);
    w[3] = 0.0;
    EXPECT_THROW(principal_zmatrix(A, w), InvalidArgument);
}
