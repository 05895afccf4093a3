#pragma once

namespace perseg {

/// Reaction of the normalized bistable equation: mu1 (alpha - z) z^+ - mu2 (d + z) z^-.
inline double bistable_reaction(double z, double mu1, double mu2, double alpha, double d) noexcept {
    if (z > 0.0) return mu1 * (alpha - z) * z;
    if (z < 0.0) return mu2 * (d + z) * z;  // -mu2 (d + z) z^- with z^- = -z
    return 0.0;
}

/// Almost-everywhere derivative of bistable_reaction; zero at z = 0 exactly.
inline double bistable_derivative(double z, double mu1, double mu2, double alpha, double d) noexcept {
    if (z > 0.0) return mu1 * (alpha - 2.0 * z);
    if (z < 0.0) return mu2 * (d + 2.0 * z);
    return 0.0;
}

}  // namespace perseg
