#include "perseg/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "perseg/error.hpp"
#include "perseg/linalg.hpp"

namespace perseg {

namespace {

constexpr int kMaxNewton = 100;
constexpr int kMaxHalvings = 50;
constexpr double kResidualTol = 1e-11;

void check_inputs(double A, double M, double nu, double R, std::size_t n) {
    if (!(A > 0.0) || !(M > 0.0) || !(R > 0.0) || !std::isfinite(A * M * R))
        throw InvalidArgument("logistic: A, M and R must be positive");
    if (!(nu >= 0.5) || !(nu < 1.0)) throw InvalidArgument("logistic: nu must lie in [1/2, 1)");
    if (n < 64) throw InvalidArgument("logistic: at least 64 intervals required");
}

// Numerov residual of U'' + g(nu + U) = 0 at interior nodes, U = 0 at both ends.
struct Numerov {
    double nu;
    double h;
    std::size_t n;

    double g(double u) const {
        const double w = nu + u;
        return (1.0 - w) * w;
    }
    double dg(double u) const { return 1.0 - 2.0 * (nu + u); }

    // u holds the n+1 nodal deviations; writes n-1 interior residuals.
    void residual(const std::vector<double>& u, std::vector<double>& r) const {
        const double inv_h2 = 1.0 / (h * h);
        for (std::size_t j = 1; j < n; ++j) {
            r[j - 1] = (u[j - 1] - 2.0 * u[j] + u[j + 1]) * inv_h2 + (g(u[j - 1]) + 10.0 * g(u[j]) + g(u[j + 1])) / 12.0;
        }
    }
};

double sup_norm(const std::vector<double>& r) {
    double s = 0.0;
    for (double v : r) s = std::max(s, std::abs(v));
    return s;
}

double l2_norm(const std::vector<double>& r) {
    double s = 0.0;
    for (double v : r) s += v * v;
    return std::sqrt(s);
}

// F(nu + D) - F(nu) for F(W) = W^2/2 - W^3/3, expanded so small D keeps full relative precision.
double energy_increment(double nu, double D) {
    return D * (nu - nu * nu) + D * D * (0.5 - nu) - D * D * D / 3.0;
}

}  // namespace

LogisticProfile solve_profile(double A, double M, double nu, double R, std::size_t n) {
    check_inputs(A, M, nu, R, n);
    if (n % 2 != 0) ++n;
    const double rho = std::sqrt(A * M) * R;
    const Numerov eq{nu, 2.0 * rho / static_cast<double>(n), n};

    std::vector<double> u(n + 1, 0.0);
    for (std::size_t j = 1; j < n; ++j) {
        const double s = -1.0 + 2.0 * static_cast<double>(j) / static_cast<double>(n);
        u[j] = (1.0 - nu) * (1.0 - s * s);
    }

    const std::size_t m = n - 1;
    std::vector<double> r(m), lower(m), diag(m), upper(m), step(m), trial(n + 1), r_trial(m);
    eq.residual(u, r);
    double merit = l2_norm(r);
    const double inv_h2 = 1.0 / (eq.h * eq.h);
    int it = 0;
    for (; it < kMaxNewton; ++it) {
        // Differences of O(|U|) values divided by h^2 cannot resolve below this floor.
        const double floor = 16.0 * 2.2e-16 * std::max(sup_norm(u), 1e-300) * inv_h2;
        if (sup_norm(r) <= std::max(kResidualTol, floor)) break;
        for (std::size_t j = 1; j < n; ++j) {
            lower[j - 1] = inv_h2 + eq.dg(u[j - 1]) / 12.0;
            diag[j - 1] = -2.0 * inv_h2 + 10.0 * eq.dg(u[j]) / 12.0;
            upper[j - 1] = inv_h2 + eq.dg(u[j + 1]) / 12.0;
        }
        std::vector<double> neg(m);
        for (std::size_t i = 0; i < m; ++i) neg[i] = -r[i];
        solve_tridiagonal(lower, diag, upper, neg, step);

        double scale = 1.0;
        bool accepted = false;
        for (int half = 0; half <= kMaxHalvings; ++half) {
            trial = u;
            for (std::size_t j = 1; j < n; ++j) trial[j] += scale * step[j - 1];
            eq.residual(trial, r_trial);
            const double trial_merit = l2_norm(r_trial);
            if (trial_merit < merit) {
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        double step_size = 0.0;
        for (double s : step) step_size = std::max(step_size, std::abs(s));
        if (!accepted) {
            // Residual at the rounding floor: no descent direction remains.
            if (step_size <= 1e-13 * std::max(1e-300, sup_norm(u))) break;
            throw SolverFailure("logistic Newton: no residual decrease after step halving", sup_norm(r), it);
        }
        u.swap(trial);
        r.swap(r_trial);
        merit = l2_norm(r);
        if (scale == 1.0 && step_size <= 4e-16 * sup_norm(u)) {
            ++it;
            break;
        }
    }
    if (it >= kMaxNewton && sup_norm(r) > 1e-8)
        throw SolverFailure("logistic Newton: iteration limit", A * A * M * sup_norm(r), it);

    LogisticProfile out;
    out.A = A;
    out.M = M;
    out.nu = nu;
    out.R = R;
    out.n = n;
    out.values.resize(n + 1);
    out.deviation.resize(n + 1);
    for (std::size_t j = 0; j <= n; ++j) {
        out.deviation[j] = A * u[j];
        out.values[j] = A * (nu + u[j]);
    }
    out.values.front() = out.values.back() = nu * A;
    out.residual = A * A * M * sup_norm(r);
    out.iterations = it;
    return out;
}

BoundarySlope boundary_slope(const LogisticProfile& p) {
    BoundarySlope s;
    const double scale = std::sqrt(p.A * p.M);
    s.scaled_spacing = scale * p.spacing();
    const double D = p.deviation[p.n / 2] / p.A;
    s.energy = p.A * scale * std::sqrt(std::max(0.0, 2.0 * energy_increment(p.nu, D)));
    const auto& u = p.deviation;
    s.finite_difference = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * p.spacing());
    return s;
}

double phi(double A, double M, double nu, double R, std::size_t n) {
    const LogisticProfile p = solve_profile(A, M, nu, R, n);
    const BoundarySlope s = boundary_slope(p);
    const double tol = std::max(1e-6, 10.0 * s.scaled_spacing * s.scaled_spacing);
    if (std::abs(s.finite_difference - s.energy) > tol * s.energy) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "phi: slope cross-check failed (energy " << s.energy << ", finite difference " << s.finite_difference
            << ")";
        throw NumericalInconsistency(msg.str());
    }
    return s.energy;
}

double gamma_limit(double A, double M, double nu) {
    if (!(nu >= 0.5) || !(nu < 1.0)) throw InvalidArgument("gamma_limit: nu must lie in [1/2, 1)");
    return A * std::sqrt(A * M) * std::sqrt(1.0 / 3.0 + nu * nu * (2.0 * nu / 3.0 - 1.0));
}

double phi_half_line(double A, double M, double nu, std::size_t n) {
    const double R = 40.0 / std::sqrt(A * M);
    const double first = phi(A, M, nu, R, n);
    const double second = phi(A, M, nu, 2.0 * R, 2 * n);
    if (std::abs(second - first) > 1e-4 * second)
        throw NumericalInconsistency("phi_half_line: large-R surrogate not converged");
    return second;
}

PhiTable phi_table(double A, double M, const std::vector<double>& nu_list, const std::vector<double>& R_list,
                   std::size_t n) {
    if (!std::is_sorted(nu_list.begin(), nu_list.end()) || !std::is_sorted(R_list.begin(), R_list.end()))
        throw InvalidArgument("phi_table: lists must be sorted");
    PhiTable t;
    t.A = A;
    t.M = M;
    t.nu_list = nu_list;
    t.R_list = R_list;
    for (double nu : nu_list) {
        t.gamma.push_back(gamma_limit(A, M, nu));
        std::vector<double> row;
        for (double R : R_list) row.push_back(phi(A, M, nu, R, n));
        t.values.push_back(std::move(row));
    }
    auto note = [&](std::size_t i, std::size_t j, const char* what) {
        std::ostringstream msg;
        msg << what << " at nu = " << nu_list[i] << ", R = " << R_list[j];
        t.violations.push_back(msg.str());
    };
    for (std::size_t i = 0; i < nu_list.size(); ++i) {
        for (std::size_t j = 0; j < R_list.size(); ++j) {
            if (!(t.values[i][j] < t.gamma[i])) {
                t.below_gamma = false;
                note(i, j, "value not below gamma");
            }
            if (j > 0 && !(t.values[i][j] > t.values[i][j - 1])) {
                t.increasing_in_R = false;
                note(i, j, "not increasing in R");
            }
            if (i > 0 && !(t.values[i][j] < t.values[i - 1][j])) {
                t.decreasing_in_nu = false;
                note(i, j, "not decreasing in nu");
            }
        }
    }
    return t;
}

}  // namespace perseg
