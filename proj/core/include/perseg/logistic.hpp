#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace perseg {

/// Solution of -w'' = M (A - w) w on (-R, R) with w(+-R) = nu A, sampled on n+1 uniform nodes.
struct LogisticProfile {
    double A = 1.0;
    double M = 1.0;
    double nu = 0.5;
    double R = 1.0;
    std::size_t n = 0;          // number of intervals, even
    std::vector<double> values; // n + 1 samples, values.front() = values.back() = nu A
    /// w - nu A at the same nodes, kept separately to avoid cancellation near the boundary.
    std::vector<double> deviation;
    double residual = 0.0;      // sup norm of the unscaled discrete residual
    int iterations = 0;

    double spacing() const noexcept { return 2.0 * R / static_cast<double>(n); }
    double x(std::size_t i) const noexcept { return -R + spacing() * static_cast<double>(i); }
    double center_value() const noexcept { return values[n / 2]; }
};

/// Damped Newton on the deviation U = W - nu of the scaled problem -W'' = (1 - W) W on (-rho, rho),
/// rho = sqrt(A M) R, discretized with the fourth-order Numerov stencil.
/// n is rounded up to an even count.
LogisticProfile solve_profile(double A, double M, double nu, double R, std::size_t n = 4096);

struct BoundarySlope {
    double energy = 0.0;            // from the first integral, using the center value
    double finite_difference = 0.0; // one-sided three-point formula at -R
    double scaled_spacing = 0.0;    // grid spacing in the scaled variable
};

BoundarySlope boundary_slope(const LogisticProfile& profile);

/// Slope w'(-R). Returns the energy value after checking it against the finite difference
/// to max(1e-6, 10 h^2) relative, h being the scaled spacing; throws NumericalInconsistency otherwise.
double phi(double A, double M, double nu, double R, std::size_t n = 4096);

/// Limit of phi as R -> infinity.
double gamma_limit(double A, double M, double nu);

/// phi at R with sqrt(A M) R >= 40, doubled once to confirm |dPhi| <= 1e-4 Phi.
double phi_half_line(double A, double M, double nu, std::size_t n = 4096);

struct PhiTable {
    double A = 1.0;
    double M = 1.0;
    std::vector<double> nu_list;
    std::vector<double> R_list;
    std::vector<std::vector<double>> values; // values[i_nu][i_R]
    std::vector<double> gamma;               // per nu
    bool increasing_in_R = true;
    bool decreasing_in_nu = true;
    bool below_gamma = true;
    std::vector<std::string> violations;

    bool ok() const noexcept { return increasing_in_R && decreasing_in_nu && below_gamma; }
};

/// Tabulates phi on the product of the (sorted) lists and records every monotonicity violation.
PhiTable phi_table(double A, double M, const std::vector<double>& nu_list, const std::vector<double>& R_list,
                   std::size_t n = 4096);

}  // namespace perseg
