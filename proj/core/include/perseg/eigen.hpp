#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

#include "perseg/grid.hpp"
#include "perseg/system.hpp"

namespace perseg {

enum class Sense { semilinear, quasilinear, system, dirichlet };

const char* to_string(Sense s);

/// Principal eigenpair. Eigenfunctions are also kept as logarithms: components far below the
/// largest one may underflow as doubles while their logarithms stay finite.
struct EigenResult {
    double lambda = 0.0;
    std::vector<Field> eigenfunctions;
    std::vector<std::vector<double>> log_eigenfunctions;
    double residual = 0.0; // sup |A x - lambda W x| / ((|lambda| + 1) sup |x|)
    int iterations = 0;
    Sense sense = Sense::semilinear;
};

struct EigenOptions {
    int max_iterations = 10000;
    double tolerance = 1e-9; // required relative residual
};

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Potential mu1 (alpha - 2v) 1_{v>0} + mu2 (d + 2v) 1_{v<0}; zero where v vanishes.
Field f1_of(const Field& v, const Coefficients& c, double alpha, double d);

/// Matrix of -D^2 - diag(q) with periodic wrap.
SparseMatrix scalar_operator(const Field& q);

/// Linearization of the competition system at (u1, u2), unknowns ordered (phi_0..phi_{n-1}, psi_0..).
/// `cooperative` conjugates with diag(I, -I), making every off-diagonal entry nonpositive.
SparseMatrix system_operator(std::span<const double> u1, std::span<const double> u2, double k,
                             const SystemCoefficients& sys, bool cooperative);

/// -D^2 - q on `cells` periods starting at node `start`, homogeneous Dirichlet at both ends.
SparseMatrix dirichlet_operator(const Field& q, std::size_t start, std::size_t cells);

/// Principal eigenpair of A x = lambda diag(w) x for an irreducible matrix with nonpositive
/// off-diagonal entries: shift-invert iteration with Collatz-Wielandt shifts, then Newton on
/// the logarithm of the eigenvector. Returns the log eigenvector normalized to max 0.
struct ZMatrixEigen {
    double lambda = 0.0;
    std::vector<double> log_x;
    double residual = 0.0;
    int iterations = 0;
};
ZMatrixEigen principal_zmatrix(const SparseMatrix& A, std::span<const double> w, const EigenOptions& opts = {},
                               std::optional<std::vector<double>> log_guess = std::nullopt);

EigenResult principal_scalar(const Field& q, const EigenOptions& opts = {});

/// -phi'' - q phi = lambda weight phi, weight > 0.
EigenResult principal_weighted(const Field& q, const Field& weight, const EigenOptions& opts = {});

/// Cooperative form of the system linearization; (phi, psi) normalized by max(alpha phi + d psi) = 1.
EigenResult principal_system(const Field& u1, const Field& u2, double k, const SystemCoefficients& sys,
                             const EigenOptions& opts = {});

/// Dirichlet problem on (y - m L, y + (m + 1) L) with `cells` = 2m + 1; y snaps to the nearest node.
/// The eigenfunction is returned on a grid of `cells` periods whose node 0 is the left end.
EigenResult principal_dirichlet(const Field& q, double y, std::size_t cells = 1, const EigenOptions& opts = {});

/// Sum of (D+ phi)^2 h divided by sum w phi^2 h: the Dirichlet energy of the weighted-unit eigenfunction.
double gradient_energy(const Field& phi, const Field& weight);

}  // namespace perseg
