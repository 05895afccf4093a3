#include "perseg/system.hpp"

#include "perseg/error.hpp"

namespace perseg {

SystemCoefficients system_coefficients(const Coefficients& c, double alpha, double d) {
    if (!(alpha > 0.0) || !(d > 0.0)) throw InvalidArgument("system_coefficients: alpha and d must be positive");
    return {alpha * c.mu1, (d * d) * c.mu2, c.omega, alpha, d};
}

Coefficients normalized_coefficients(const SystemCoefficients& s) {
    return {(1.0 / s.alpha) * s.mu1, (1.0 / (s.d * s.d)) * s.mu2, s.omega};
}

}  // namespace perseg
