#pragma once

#include "perseg/grid.hpp"

namespace perseg {

/// Coefficients of the competition system
///   -u1'' = mu1 (1 - u1) u1 - k omega u1 u2,   -d u2'' = mu2 (1 - u2) u2 - alpha k omega u1 u2.
struct SystemCoefficients {
    Field mu1;
    Field mu2;
    Field omega;
    double alpha = 1.0;
    double d = 1.0;
};

/// From the normalized scalar coefficients: mu1 -> alpha mu1, mu2 -> d^2 mu2.
SystemCoefficients system_coefficients(const Coefficients& normalized, double alpha, double d);

/// Inverse map, back to the coefficients of the normalized scalar equation.
Coefficients normalized_coefficients(const SystemCoefficients& sys);

}  // namespace perseg
