#include "perseg/linalg.hpp"

#include <cmath>

#include "perseg/error.hpp"

namespace perseg {

CyclicTridiagonal::CyclicTridiagonal(std::vector<double> lower, std::vector<double> diag, std::vector<double> upper)
    : n_(diag.size()), upper_(std::move(upper)) {
    if (n_ < 3 || lower.size() != n_ || upper_.size() != n_)
        throw InvalidArgument("CyclicTridiagonal: need three bands of equal length >= 3");
    const std::size_t n = n_;
    pivot_.assign(n - 1, 0.0);
    border_.assign(n - 1, 0.0);
    mult_.assign(n - 1, 0.0);
    last_mult_.assign(n - 1, 0.0);

    pivot_[0] = diag[0];
    border_[0] = lower[0];
    double last_coef = upper_[n - 1];  // last row, coefficient of the current column
    double last_diag = diag[n - 1];
    for (std::size_t i = 1; i <= n - 2; ++i) {
        if (pivot_[i - 1] == 0.0) throw NumericalInconsistency("CyclicTridiagonal: zero pivot");
        const double m = lower[i] / pivot_[i - 1];
        mult_[i] = m;
        pivot_[i] = diag[i] - m * upper_[i - 1];
        border_[i] = (i == n - 2 ? upper_[n - 2] : 0.0) - m * border_[i - 1];
        const double ml = last_coef / pivot_[i - 1];
        last_mult_[i - 1] = ml;
        last_diag -= ml * border_[i - 1];
        last_coef = (i == n - 2 ? lower[n - 1] : 0.0) - ml * upper_[i - 1];
    }
    if (pivot_[n - 2] == 0.0) throw NumericalInconsistency("CyclicTridiagonal: zero pivot");
    const double ml = last_coef / pivot_[n - 2];
    last_mult_[n - 2] = ml;
    last_pivot_ = last_diag - ml * border_[n - 2];
    if (last_pivot_ == 0.0) throw NumericalInconsistency("CyclicTridiagonal: singular matrix");
}

void CyclicTridiagonal::solve(std::span<const double> rhs, std::span<double> x) const {
    const std::size_t n = n_;
    if (rhs.size() != n || x.size() != n) throw InvalidArgument("CyclicTridiagonal::solve: size mismatch");
    std::vector<double> y(n);
    y[0] = rhs[0];
    double y_last = rhs[n - 1];
    for (std::size_t i = 1; i <= n - 2; ++i) {
        y[i] = rhs[i] - mult_[i] * y[i - 1];
        y_last -= last_mult_[i - 1] * y[i - 1];
    }
    y_last -= last_mult_[n - 2] * y[n - 2];
    const double xl = y_last / last_pivot_;
    x[n - 1] = xl;
    x[n - 2] = (y[n - 2] - border_[n - 2] * xl) / pivot_[n - 2];
    for (std::size_t i = n - 2; i-- > 0;) x[i] = (y[i] - upper_[i] * x[i + 1] - border_[i] * xl) / pivot_[i];
}

std::vector<double> CyclicTridiagonal::solve(std::span<const double> rhs) const {
    std::vector<double> x(n_);
    solve(rhs, x);
    return x;
}

void solve_tridiagonal(std::span<const double> lower, std::span<const double> diag, std::span<const double> upper,
                       std::span<const double> rhs, std::span<double> x) {
    const std::size_t n = diag.size();
    if (n == 0 || lower.size() != n || upper.size() != n || rhs.size() != n || x.size() != n)
        throw InvalidArgument("solve_tridiagonal: size mismatch");
    std::vector<double> c(n), g(n);
    double p = diag[0];
    if (p == 0.0) throw NumericalInconsistency("solve_tridiagonal: zero pivot");
    c[0] = upper[0] / p;
    g[0] = rhs[0] / p;
    for (std::size_t i = 1; i < n; ++i) {
        p = diag[i] - lower[i] * c[i - 1];
        if (p == 0.0) throw NumericalInconsistency("solve_tridiagonal: zero pivot");
        c[i] = i + 1 < n ? upper[i] / p : 0.0;
        g[i] = (rhs[i] - lower[i] * g[i - 1]) / p;
    }
    x[n - 1] = g[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = g[i] - c[i] * x[i + 1];
}

}  // namespace perseg
