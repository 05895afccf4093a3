#pragma once

// Shared fixtures and independent reference computations for the test suites.

#include <cmath>
#include <utility>

#include "perseg/construction.hpp"
#include "perseg/elliptic.hpp"

namespace perseg::test {

/// sqrt(2 M int_{nu A}^{A} (A - s) s ds).
inline double closed_form_gamma(double A, double M, double nu) {
    const double a = nu * A;
    const double integral = A * (A * A - a * a) / 2.0 - (A * A * A - a * a * a) / 3.0;
    return std::sqrt(2.0 * M * integral);
}

/// Slope w'(-R) of -w'' = M (A - w) w on (-R, R) with w(+-R) = nu A, by classical RK4 shooting
/// from the boundary: the slope s is bisected until w' vanishes exactly at the center. Larger
/// slopes turn later, so the sign of w'(0) brackets the root. Independent of the library's solver.
inline double shooting_phi(double A, double M, double nu, double R, int steps = 20000) {
    auto slope_at_center = [&](double s) {
        double w = nu * A, p = s;
        const double h = R / steps;
        auto f = [&](double ww) { return -M * (A - ww) * ww; };
        for (int i = 0; i < steps; ++i) {
            const double k1w = p, k1p = f(w);
            const double k2w = p + 0.5 * h * k1p, k2p = f(w + 0.5 * h * k1w);
            const double k3w = p + 0.5 * h * k2p, k3p = f(w + 0.5 * h * k2w);
            const double k4w = p + h * k3p, k4p = f(w + h * k3w);
            w += h / 6.0 * (k1w + 2 * k2w + 2 * k3w + k4w);
            p += h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
            if (p < 0.0) return p; // turned before the center
        }
        return p;
    };
    double lo = 0.0, hi = closed_form_gamma(A, M, nu);
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (slope_at_center(mid) > 0.0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Reference construction at twice the threshold, built once per test binary.
inline const SegregatedState& reference_state(std::size_t n = 1026) {
    static const double L = 2.0 * find_L_threshold(CoefficientProfile{}).L_bar;
    if (n == 258) {
        static const SegregatedState coarse = assemble_v(L, CoefficientProfile{}, 258);
        return coarse;
    }
    static const SegregatedState fine = assemble_v(L, CoefficientProfile{}, 1026);
    return fine;
}

inline const SegregatedState& polished_state(std::size_t n = 1026) {
    if (n == 258) {
        static const SegregatedState coarse = polish(reference_state(258));
        return coarse;
    }
    static const SegregatedState fine = polish(reference_state(1026));
    return fine;
}

}  // namespace perseg::test
