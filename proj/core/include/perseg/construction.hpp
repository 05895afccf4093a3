#pragma once

#include <cstddef>
#include <vector>

#include "perseg/grid.hpp"

namespace perseg {

struct ConstructionOptions {
    std::size_t logistic_n = 4096;
    /// Bisection stops once the bracket is narrower than root_rtol times its magnitude.
    double root_rtol = 1e-10;
    int max_bisect = 200;
};

/// Phi1(nu, L) = phi(alpha, M1, nu, r1 L) and Phi2(nu, L) = phi(d, M2, nu, r2 L).
double phi1(double nu, double L, const CoefficientProfile& profile, const ConstructionOptions& opts = {});
double phi2(double nu, double L, const CoefficientProfile& profile, const ConstructionOptions& opts = {});

/// delta(nu, L) = -Phi1(nu, L) r0 L + alpha nu, the value reached at the end of the descending neutral zone.
double delta(double nu, double L, const CoefficientProfile& profile, const ConstructionOptions& opts = {});

/// Root of delta(1/2, L) = -d.
double find_L0(const CoefficientProfile& profile, const ConstructionOptions& opts = {});

struct NuBounds {
    double lower = 0.0; // delta(lower, L) = -d
    double upper = 0.0; // delta(upper, L) = -d/2
};

/// Requires L > L0; throws DomainError otherwise.
NuBounds nu_bounds(double L, const CoefficientProfile& profile, const ConstructionOptions& opts = {});

/// psi(nu, L) = Phi1(nu, L) - Phi2(-delta(nu, L)/d, L), defined on (lower, upper].
double psi(double nu, double L, const CoefficientProfile& profile, const ConstructionOptions& opts = {});
double psi(double nu, double L, const NuBounds& bounds, const CoefficientProfile& profile,
           const ConstructionOptions& opts = {});
/// psi at the closed endpoint nu = upper, (alpha upper + d/2)/(r0 L) - Phi2(1/2, L).
double psi_at_upper(double L, const NuBounds& bounds, const CoefficientProfile& profile,
                    const ConstructionOptions& opts = {});

struct ThresholdReport {
    double L0 = 0.0;
    double L_bar = 0.0;  // minimal L with psi(upper_L, L) < 0
    double L_star = 0.0; // root of Phi2(1/2, L) L = max(alpha + d/2, alpha/2 + d) / r0
    bool ordered = false; // L0 <= L_bar < L_star
};

ThresholdReport find_L_threshold(const CoefficientProfile& profile, const ConstructionOptions& opts = {});
double find_L_star(const CoefficientProfile& profile, const ConstructionOptions& opts = {});

struct MatchingData {
    double L = 0.0;
    double nu_lower = 0.0;
    double nu_upper = 0.0;
    double nu_star = 0.0;
    double phi1_at_nu = 0.0;
    double phi2_at_image = 0.0;
    double delta_at_nu = 0.0;
    double nu_image = 0.0; // -delta_at_nu / d
    double matching_residual = 0.0;
};

/// Root of psi(., L). Requires psi(upper_L, L) < 0, i.e. L above the threshold; DomainError otherwise.
MatchingData find_nu(double L, const CoefficientProfile& profile, const ConstructionOptions& opts = {});

struct GluePoint {
    std::size_t node = 0;
    double value_jump = 0.0;
    double slope_jump = 0.0; // from one-sided second-order differences of the adjacent pieces
};

struct WeakResidual {
    double strong_l2 = 0.0;  // nodes within one node of a glue point excluded
    double strong_sup = 0.0;
    double weak_max = 0.0;   // max over hat test functions
};

struct SegregatedState {
    PeriodicGrid grid;
    Field v;
    MatchingData matching;
    CoefficientProfile profile;
    Coefficients coefficients; // piecewise-constant samples the construction solves
    std::vector<GluePoint> glue;
    double residual_l2 = 0.0;

    std::vector<std::size_t> glue_nodes() const;
};

/// Five-piece assembly on an aligned grid. Throws AssemblyError if the grid is not aligned
/// or a glue point jumps by more than 10 h.
SegregatedState assemble_v(double L, const CoefficientProfile& profile, std::size_t n,
                           const ConstructionOptions& opts = {});
SegregatedState assemble_v(const MatchingData& matching, const CoefficientProfile& profile, std::size_t n,
                           const ConstructionOptions& opts = {});

WeakResidual residual_weak_form(const SegregatedState& state);
/// Residual of the normalized equation for arbitrary v and coefficients; `excluded` lists glue nodes.
WeakResidual residual_weak_form(const Field& v, const Coefficients& coeffs, double alpha, double d,
                                const std::vector<std::size_t>& excluded = {});

/// Pointwise residual -v'' - g(v, x) of the normalized equation.
Field strong_residual(const Field& v, const Coefficients& coeffs, double alpha, double d);

}  // namespace perseg
